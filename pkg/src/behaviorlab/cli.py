"""Headless command-line front end for scripting and CI.

Analysis outputs reuse the exact serializers behind the HTTP API, so a CLI
invocation and the equivalent API request produce byte-identical documents.
Failures print one machine-parseable JSON error line on stderr and exit
nonzero (exit code keyed to the error code).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ValidationError, WorkbenchError
from .fixtures import synth_dataset
from .jsonio import canonical_json
from .service import ServiceConfig, WorkbenchApp, serve
from .workspace import Workspace, read_jsonl

EXIT_CODES = {"validation": 2, "not_found": 3, "conflict": 4, "degenerate_input": 5}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WorkbenchError as err:
        sys.stderr.write(canonical_json({"error": err.to_dict()}))
        return EXIT_CODES.get(err.code, 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="behaviorlab",
        description="label-driven behavior sequence analytics for game telemetry")
    parser.add_argument("--data-dir", default="data",
                        help="workspace directory (default: ./data)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="create a session from config + events")
    p.add_argument("session_config")
    p.add_argument("events_file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", help="run all store audits")
    p.add_argument("target_dir", nargs="?", default=None,
                   help="data dir to validate (defaults to --data-dir)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("labels", help="label import/export")
    labels_sub = p.add_subparsers(dest="labels_command", required=True)
    pe = labels_sub.add_parser("export")
    pe.add_argument("session")
    pe.add_argument("--author", default=None)
    pe.add_argument("--out", default=None)
    pe.set_defaults(func=cmd_labels_export)
    pi = labels_sub.add_parser("import")
    pi.add_argument("file")
    pi.set_defaults(func=cmd_labels_import)

    p = sub.add_parser("sequences", help="build behavior sequences")
    seq_sub = p.add_subparsers(dest="sequences_command", required=True)
    pb = seq_sub.add_parser("build")
    pb.add_argument("session")
    pb.add_argument("--rater", required=True)
    pb.add_argument("--scope", choices=["player", "team"], default="player")
    pb.add_argument("--round", type=int, default=None)
    pb.add_argument("--out", default=None)
    pb.set_defaults(func=cmd_sequences_build)

    p = sub.add_parser("graphs", help="state/sequence/group graph models")
    p.add_argument("kind", choices=["state", "sequence", "group"])
    p.add_argument("session")
    p.add_argument("--rater", required=True)
    p.add_argument("--scope", choices=["player", "team"], default="player",
                   help="sequence scope for the state graph")
    p.add_argument("--round", type=int, default=None)
    p.add_argument("--metric", choices=["jaccard", "discrete"], default="jaccard")
    p.add_argument("--mode", choices=["collapsed", "expanded"], default="collapsed")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_graphs)

    p = sub.add_parser("irr", help="inter-rater agreement report")
    p.add_argument("session")
    p.add_argument("--raters", required=True, help="two rater ids, comma separated")
    p.add_argument("--bin-ms", type=int, default=1000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_irr)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", default=None, help="JSON config file")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("fixtures", help="synthetic datasets")
    fix_sub = p.add_subparsers(dest="fixtures_command", required=True)
    ps = fix_sub.add_parser("synth")
    ps.add_argument("--cohorts", type=int, default=2)
    ps.add_argument("--players-per", type=int, default=5)
    ps.add_argument("--seed", type=int, default=7)
    ps.add_argument("--rounds", type=int, default=3)
    ps.add_argument("--out-dir", default="fixtures")
    ps.set_defaults(func=cmd_fixtures_synth)

    p = sub.add_parser("report", help="render figures + delimited outputs")
    p.add_argument("session")
    p.add_argument("--rater", required=True)
    p.add_argument("--metric", choices=["jaccard", "discrete"], default="jaccard")
    p.add_argument("--mode", choices=["collapsed", "expanded"], default="collapsed")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--raters", default=None,
                   help="two rater ids for the agreement panel, comma separated")
    p.add_argument("--bin-ms", type=int, default=1000)
    p.add_argument("--out-dir", default="report")
    p.set_defaults(func=cmd_report)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _app(args) -> WorkbenchApp:
    return WorkbenchApp(Workspace(args.data_dir))


def cmd_ingest(args) -> int:
    config_doc = json.loads(Path(args.session_config).read_text(encoding="utf-8"))
    workspace = Workspace(args.data_dir)
    handle, report = workspace.create_session(config_doc,
                                              read_jsonl(Path(args.events_file)))
    sys.stdout.write(canonical_json(dict(report.to_dict(),
                                         session_id=handle.session.id,
                                         summary=handle.events.summary())))
    return 0


def cmd_validate(args) -> int:
    workspace = Workspace(args.target_dir or args.data_dir)
    problems = workspace.audit()
    sys.stdout.write(canonical_json({
        "sessions_checked": len(workspace.session_ids()),
        "clean": not problems,
        "problems": problems,
    }))
    return 0 if not problems else 1


def cmd_labels_export(args) -> int:
    workspace = Workspace(args.data_dir)
    handle = workspace.open(args.session)
    _emit(canonical_json(handle.labels.export_doc(author=args.author)), args.out)
    return 0


def cmd_labels_import(args) -> int:
    doc = json.loads(Path(args.file).read_text(encoding="utf-8"))
    session_ids = {str(l.get("session_id", "")) for l in doc.get("labels", [])}
    session_ids |= {str(doc["session_id"])} if "session_id" in doc else set()
    session_ids.discard("")
    if len(session_ids) != 1:
        raise ValidationError("label document must target exactly one session",
                              sessions=sorted(session_ids))
    workspace = Workspace(args.data_dir)
    handle = workspace.open(session_ids.pop())
    report = handle.labels.import_doc(doc)
    handle.save_labels()
    sys.stdout.write(canonical_json(report.to_dict()))
    return 0


def cmd_sequences_build(args) -> int:
    app = _app(args)
    handle = app.workspace.open(args.session)
    query = {"rater": args.rater, "scope": args.scope}
    if args.round is not None:
        query["round"] = str(args.round)
    _emit(canonical_json(app.compute_sequences(handle, query)), args.out)
    return 0


def cmd_graphs(args) -> int:
    app = _app(args)
    handle = app.workspace.open(args.session)
    if args.kind == "state":
        query = {"rater": args.rater, "scope": args.scope}
        if args.round is not None:
            query["round"] = str(args.round)
        doc = app.compute_state_graph(handle, query)
        if args.format == "dot":
            from .graphs import state_graph_from_doc, state_graph_to_dot
            _emit(state_graph_to_dot(state_graph_from_doc(doc)), args.out)
            return 0
    else:
        query = {"rater": args.rater, "metric": args.metric, "mode": args.mode,
                 "k": str(args.k), "seed": str(args.seed)}
        scope = "player" if args.kind == "sequence" else "team"
        doc = app.compute_scatter(handle, query, scope)
        if args.format == "dot":
            _emit(_scatter_doc_to_dot(doc), args.out)
            return 0
    _emit(canonical_json(doc), args.out)
    return 0


def _scatter_doc_to_dot(doc: dict) -> str:
    from .graphs import _dot_quote
    lines = [f"graph \"{doc['scope']}s\" {{"]
    for node in sorted(doc["nodes"], key=lambda n: n["owner"]["id"]):
        lines.append(f"  {_dot_quote(node['owner']['id'])} "
                     f'[pos="{node["x"]!r},{node["y"]!r}!", cluster={node["cluster"]}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_irr(args) -> int:
    raters = [r for r in args.raters.split(",") if r]
    if len(raters) != 2:
        raise ValidationError("--raters needs exactly two ids", raters=raters)
    app = _app(args)
    handle = app.workspace.open(args.session)
    query = {"raterA": raters[0], "raterB": raters[1], "bin_ms": str(args.bin_ms)}
    _emit(canonical_json(app.compute_irr(handle, query)), args.out)
    return 0


def cmd_serve(args) -> int:
    config = ServiceConfig.load(args.config)
    if args.port is not None:
        config.port = args.port
    if args.data_dir != "data" or not config.data_dir:
        config.data_dir = args.data_dir
    server = serve(Workspace(config.data_dir), config, host=args.host)
    sys.stderr.write(f"serving on http://{args.host}:{server.server_port}\n")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_fixtures_synth(args) -> int:
    data = synth_dataset(cohorts=args.cohorts, players_per=args.players_per,
                         seed=args.seed, rounds=args.rounds)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "session_config.json").write_text(canonical_json(data["config"]),
                                                 encoding="utf-8")
    with open(out_dir / "events.jsonl", "w", encoding="utf-8") as fh:
        for record in data["events"]:
            fh.write(canonical_json(record))
    (out_dir / "labels.json").write_text(canonical_json(data["labels"]),
                                         encoding="utf-8")
    sys.stdout.write(canonical_json({
        "session_id": data["session_id"],
        "out_dir": str(out_dir),
        "events": len(data["events"]),
        "labels": len(data["labels"]["labels"]),
    }))
    return 0


def cmd_report(args) -> int:
    from .report import render_report
    app = _app(args)
    handle = app.workspace.open(args.session)
    raters = None
    if args.raters:
        raters = [r for r in args.raters.split(",") if r]
        if len(raters) != 2:
            raise ValidationError("--raters needs exactly two ids", raters=raters)
    manifest = render_report(app, handle, rater=args.rater, out_dir=Path(args.out_dir),
                             metric=args.metric, mode=args.mode, k=args.k,
                             seed=args.seed, irr_raters=raters, bin_ms=args.bin_ms)
    sys.stdout.write(canonical_json(manifest))
    return 0


if __name__ == "__main__":
    sys.exit(main())
