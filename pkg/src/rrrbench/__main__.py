import sys

if sys.argv[1:2] == ["synth"]:
    # benchmark children: skip loading numpy and the rest of the harness
    from .synth import main as _synth

    sys.exit(_synth(sys.argv[2:]))

from .cli import main

sys.exit(main())
