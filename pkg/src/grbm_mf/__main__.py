import sys

from grbm_mf.cli import main

sys.exit(main())
