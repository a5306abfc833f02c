import argparse
import json
import logging
import sys

from .models import BACKBONES
from .pipeline import ExtractorSpec, extract

log = logging.getLogger("featex")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featex",
        description="Run images through a classifier's penultimate layer "
                    "and write the features as an FMX1 file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    ex = sub.add_parser("extract", help="featurize a directory of images")
    ex.add_argument("--dir", required=True, help="directory of images")
    ex.add_argument("--backbone", default="inception_v3",
                    choices=sorted(BACKBONES))
    ex.add_argument("--out", required=True, help="output .fmx path")
    ex.add_argument("--batch-size", type=int, default=8)
    ex.add_argument("--device", default="cpu")
    ex.add_argument("--weights", default="pretrained",
                    choices=["pretrained", "random"],
                    help="published checkpoint, or seeded random init for "
                         "hermetic runs")
    ex.add_argument("--seed", type=int, default=0,
                    help="init seed when --weights random")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s",
                        level=logging.INFO, force=True)
    ns = build_parser().parse_args(argv)
    spec = ExtractorSpec(
        backbone=ns.backbone,
        batch_size=ns.batch_size,
        device=ns.device,
        weights=ns.weights,
        seed=ns.seed,
    )
    try:
        manifest = extract(ns.dir, spec, ns.out)
    except (ValueError, NotADirectoryError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return 2
    except Exception as exc:
        # Weight download failures and inference errors land here.
        log.error("extraction failed: %s", exc)
        return 3
    print(json.dumps({
        "out": ns.out,
        "rows": manifest["rows"],
        "dim": manifest["dim"],
        "source_tag": manifest["source_tag"],
        "skipped": len(manifest["skipped"]),
    }))
    return 0


if __name__ == "__main__":
    sys.exit(main())
