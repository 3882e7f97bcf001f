import sys

from trapbench.cli import main

sys.exit(main())
