import sys

from combsw.main import main

sys.exit(main())
