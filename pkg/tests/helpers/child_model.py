"""Line-protocol model child used by the adapter tests.

Usage: child_model.py MODE [coef... intercept]

Modes:
  first-feature  predict the first cell of each row
  linear         affine map with coefficients/intercept from argv
  malformed      reply with a non-JSON line
  wrong-count    drop the last prediction from each response
  wrong-id       echo a wrong request id
  crash          exit immediately with a diagnostic on stderr
"""

import json
import sys


def main() -> None:
    mode = sys.argv[1]
    if mode == "crash":
        print("child crashed on purpose", file=sys.stderr)
        sys.exit(3)
    params = [float(a) for a in sys.argv[2:]]
    for line in sys.stdin:
        req = json.loads(line)
        rows = req["rows"]
        if mode == "first-feature":
            preds = [float(r[0]) for r in rows]
        elif mode == "linear":
            coef, intercept = params[:-1], params[-1]
            preds = [sum(c * float(v) for c, v in zip(coef, r)) + intercept
                     for r in rows]
        elif mode == "malformed":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        elif mode == "wrong-count":
            preds = [float(r[0]) for r in rows][:-1]
        elif mode == "wrong-id":
            sys.stdout.write(json.dumps({"id": -1, "predictions": []}) + "\n")
            sys.stdout.flush()
            continue
        else:
            raise SystemExit(f"unknown mode {mode}")
        sys.stdout.write(json.dumps({"id": req["id"], "predictions": preds}) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
