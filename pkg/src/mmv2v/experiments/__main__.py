import sys

from mmv2v.experiments.cli import main

sys.exit(main())
