import sys

from poisgof.cli import main

sys.exit(main())
