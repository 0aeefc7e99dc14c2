"""
Scenario runner: reads a scenario file, runs every scenario and writes
report.txt, report.json and certificates/<id>.json into --out.

Exit status: 0 when every check passes, 1 when a check fails, 2 on
schema or input errors.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List

from pydantic import ValidationError

from SFW import Config, __version__
from SFW import Exception as ex
from SFW.Scenario import ScenarioResult, load_scenarios, run_scenario

log = logging.getLogger("sfw")


def setup_logging(out_dir: Path) -> None:
    fmt = logging.Formatter("[%(asctime)s] %(message)s", "%Y-%m-%d %H:%M:%S")
    root = logging.getLogger()
    root.setLevel(logging.INFO)
    for h in list(root.handlers):
        root.removeHandler(h)
    console = logging.StreamHandler()
    console.setFormatter(fmt)
    root.addHandler(console)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(out_dir / Config.LOG_FILE, mode="a", encoding="utf-8")
        file_handler.setFormatter(fmt)
        root.addHandler(file_handler)
    except OSError as exc:
        log.warning("log file unavailable: %s", exc)


def parse_args(argv: List[str] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Run symmetric forcing workbench scenarios.")
    parser.add_argument("--scenario", type=Path, required=True, help="scenario JSON file (one object or a list)")
    parser.add_argument("--out", type=Path, default=Path("out"), help="report directory")
    parser.add_argument("--depth", type=int, help="truncation depth of the Cohen-pair steps")
    parser.add_argument("--prefix", type=int, help="number of materialized stages")
    parser.add_argument("--jobs", type=int, default=Config.DEFAULT_JOBS, help="scenarios run in parallel")
    parser.add_argument("--why", action="store_true", help="print witness paths of failed HS verdicts")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser.parse_args(argv)


def write_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_reports(out_dir: Path, results: List[ScenarioResult], why: bool) -> None:
    lines = []
    for r in results:
        lines.extend(r.text(why))
        lines.append("")
        for cid, doc in sorted(r.outcome.certificates.items()):
            write_json(out_dir / "certificates" / f"{cid}.json", doc)
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} scenarios passed")
    (out_dir / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_json(out_dir / "report.json", {"schema_version": Config.SCHEMA_VERSION,
                                         "passed": passed == len(results),
                                         "scenarios": [r.to_json() for r in results]})
    for line in lines:
        log.info(line)


def exit_code(results: List[ScenarioResult]) -> int:
    codes = [r.code for r in results]
    if 2 in codes:
        return 2
    return 0 if all(r.passed for r in results) else 1


def run(argv: List[str] = None) -> int:
    args = parse_args(argv)
    setup_logging(args.out)
    log.info("sfw %s: %s", __version__, args.scenario)
    try:
        document = json.loads(args.scenario.read_text(encoding="utf-8"))
        scenarios = load_scenarios(document)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        log.error("scenario file rejected: %s", exc)
        return 2
    except ex.SFWException as exc:
        log.error("scenario file rejected: %s", exc.message)
        return exc.code

    overrides: Dict[str, Any] = {"depth": args.depth, "prefix": args.prefix}
    if args.jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_scenario, scenarios, [overrides] * len(scenarios)))
    else:
        results = [run_scenario(s, overrides) for s in scenarios]
    results.sort(key=lambda r: r.id)
    write_reports(args.out, results, args.why)
    return exit_code(results)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
