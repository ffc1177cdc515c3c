"""Run the DUO demo audit end to end with diagnostic output."""
import logging
import sys
import time

sys.path.insert(0, ".")

from src.cli.commands import cmd_duo_demo
from src.cli.models.schemas import DuoDemoRequest
from src.pipeline.report import render_text


def main():
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    request = DuoDemoRequest(n=5000, output_dir="outputs/pipeline-demo")
    print(f"{'#'*60}")
    print("RUNNING FULL AUDIT PIPELINE")
    print(f"Cohort: {request.cohort} (n={request.n}, seed={request.seed})")
    print(f"{'#'*60}\n")

    start = time.time()
    try:
        report = cmd_duo_demo(request)
        elapsed = time.time() - start

        print(f"\n{'#'*60}")
        print(f"PIPELINE COMPLETE in {elapsed:.1f}s")
        print(f"{'#'*60}")
        print(f"Chosen n_min: {report.selection.chosen}")
        print(f"Clusters: {len(report.clusters)}")
        print(f"Significant clusters: {report.tests.significant_clusters()}")
        print()
        print(render_text(report))

    except Exception as e:
        elapsed = time.time() - start
        print(f"\nPIPELINE FAILED after {elapsed:.1f}s: {type(e).__name__}: {e}")
        import traceback
        traceback.print_exc()


if __name__ == "__main__":
    main()
