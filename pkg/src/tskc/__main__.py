import sys

from tskc.cli import main

if __name__ == "__main__":
    sys.exit(main())
