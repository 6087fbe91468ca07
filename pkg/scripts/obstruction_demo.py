"""Print the obstruction report for the 3x3 periodic matrix over Q(sqrt 2)."""

import json
import sys

from perdecomp.decompose import check_remark29


def main():
    rep = check_remark29()
    json.dump(rep.to_json(), sys.stdout, indent=1)
    print()
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
