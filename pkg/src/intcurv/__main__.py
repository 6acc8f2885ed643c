import sys

from intcurv.cli import main

sys.exit(main())
