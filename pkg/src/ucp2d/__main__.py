import sys

from ucp2d.cli import main

sys.exit(main())
