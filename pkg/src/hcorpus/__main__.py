"""Allow ``python -m hcorpus`` as an alias for the console script."""

import sys

from hcorpus.cli import main

if __name__ == "__main__":
    sys.exit(main())
