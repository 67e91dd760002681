"""Allow `python -m eclab` as an alternative to the `eclab` script."""
import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
