"""
Standalone certificate verifier: replays each certificate from its JSON
alone. Exit 0 when all are accepted, 1 when one is rejected, 2 when a file
is not a certificate.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List

from pydantic import ValidationError

from SFW import Exception as ex
from SFW.PairsApp import verify_certificate


def run(argv: List[str] = None) -> int:
    parser = argparse.ArgumentParser(description="Verify workbench certificates.")
    parser.add_argument("certificates", type=Path, nargs="+")
    args = parser.parse_args(argv)
    status = 0
    for path in args.certificates:
        try:
            result = verify_certificate(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, ValidationError) as exc:
            print(f"{path}: not a certificate: {exc}")
            return 2
        except ex.SFWException as exc:
            print(f"{path}: {exc.message}")
            return exc.code
        if result.accepted:
            print(f"{path}: accepted")
        else:
            status = 1
            print(f"{path}: rejected")
            for f in result.failures:
                print(f" - {f}")
    return status


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
