import sys
from pathlib import Path

# Allow running the suite from a source checkout without installation.
_src = Path(__file__).resolve().parent.parent / "src"
if _src.is_dir() and str(_src) not in sys.path:
    try:
        import edgesim  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(_src))
