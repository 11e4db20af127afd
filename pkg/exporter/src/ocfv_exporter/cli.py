"""Command line: export an image tree to OCFV files, or verify a manifest."""

import argparse
import sys

from .backbones import BACKBONES, DEFAULT_TAP
from .export import ExportError, ExportSpec, export, verify
from .ocfv import OcfvError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ocfv-export",
        description="Frozen-backbone image feature exporter",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="export features for a class-per-folder tree",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--root", required=True, help="image root (one subfolder per class)")
    p.add_argument("--backbone", choices=sorted(BACKBONES), default="alexnet")
    p.add_argument("--tap", default=DEFAULT_TAP,
                   help="which FC activation to export (fc6 or fc7)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--weights", default="pretrained",
                   help="'pretrained', 'random', or 'file:PATH'")
    p.add_argument("--seed", type=int, default=0,
                   help="initialization seed for --weights random")
    p.add_argument("--batch-size", type=int, default=16)

    p = sub.add_parser("verify", help="re-check an exported manifest",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "export":
        spec = ExportSpec(image_root=args.root, out_dir=args.out,
                          backbone=args.backbone, tap=args.tap,
                          weights=args.weights, seed=args.seed,
                          batch_size=args.batch_size)
        try:
            report = export(spec)
        except (ExportError, OcfvError, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for cls in report.classes:
            note = f" ({cls.skipped} skipped)" if cls.skipped else ""
            print(f"{cls.name}: {cls.exported} rows{note}")
        print(f"wrote {report.manifest_path} (dim {report.dim})")
        return 0

    report = verify(args.manifest)
    for issue in report.issues:
        print(f"issue: {issue}", file=sys.stderr)
    print(f"checked {report.checked} files: "
          f"{'clean' if report.clean else f'{len(report.issues)} issues'}")
    return 0 if report.clean else 1


if __name__ == "__main__":
    sys.exit(main())
