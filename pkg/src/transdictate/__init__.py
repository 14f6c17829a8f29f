"""Translation-aided dictation: a tri-class language model conditioned on
the source sentence, a simulated acoustic channel, and two-stage search."""

from transdictate.kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
