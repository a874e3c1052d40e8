"""`proviq` command line: a thin client over the engine service API.

Every data command goes through the same request/response models the HTTP
service uses; with --server it talks to a running service, otherwise it runs
the engine in process. Exit codes are stable for scripting: 0 success,
2 generation failure, 3 module failure, 4 configuration error.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .config import EngineConfig
from .errors import ConfigError, ModuleError, ProviqError
from .service import api
from .service import models as m

EXIT_GENERATION = 2
EXIT_MODULE = 3
EXIT_CONFIG = 4


class ServiceClient:
    """Dispatches service requests either in process or over HTTP."""

    def __init__(self, config: EngineConfig | None = None, server: str | None = None):
        self.server = server.rstrip("/") if server else None
        self._engine = None
        if self.server is None:
            if config is None:
                raise ConfigError("--config is required unless --server is given")
            from .engine import Engine
            self._engine = Engine(config)

    def call(self, path: str, request, response_model):
        if self.server is None:
            handler = {
                "/v1/query": api.handle_query,
                "/v1/eval": api.handle_eval,
                "/v1/edit": api.handle_edit,
                "/v1/track": api.handle_track,
                "/v1/summarize": api.handle_summarize,
                "/v1/gen-program": api.handle_gen_program,
            }[path]
            return handler(self._engine, request)
        import httpx
        resp = httpx.post(self.server + path, json=request.model_dump(), timeout=600.0)
        if resp.status_code >= 300:
            try:
                body = resp.json()
            except ValueError:
                body = {"error": "http_error", "detail": resp.text[:200]}
            if body.get("error") == "config_error":
                raise ConfigError(body.get("detail", ""))
            if body.get("error") == "module_failure":
                raise ModuleError("service", "BackendFailure", body.get("detail", ""))
            raise ProviqError(f"{path}: HTTP {resp.status_code}: {body.get('detail', '')}")
        return response_model.model_validate(resp.json())


def _load_config(config_path: str | None, mock_world: str | None,
                 fixtures: str | None, seed: int | None) -> EngineConfig | None:
    if config_path is None:
        if mock_world is None:
            return None
        config = EngineConfig()
    else:
        config = EngineConfig.load(config_path)
    updates = {}
    if mock_world is not None:
        updates["mock_world"] = os.path.abspath(mock_world)
    if fixtures is not None:
        updates["fixtures_dir"] = os.path.abspath(fixtures)
    if seed is not None:
        updates["seed"] = seed
    return config.model_copy(update=updates) if updates else config


def common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="Engine config JSON.")(fn)
    fn = click.option("--mock-world", type=click.Path(), default=None,
                      help="Mock world file or directory (overrides config).")(fn)
    fn = click.option("--fixtures", type=click.Path(), default=None,
                      help="Fixture program directory (overrides config).")(fn)
    fn = click.option("--seed", type=int, default=None, help="Seed recorded in outputs.")(fn)
    fn = click.option("--server", default=None, help="URL of a running engine service.")(fn)
    return fn


def _client(config_path, mock_world, fixtures, seed, server) -> ServiceClient:
    try:
        config = _load_config(config_path, mock_world, fixtures, seed)
        return ServiceClient(config, server)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _run(client: ServiceClient, path: str, request, response_model):
    try:
        return client.call(path, request, response_model)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except ModuleError as exc:
        click.echo(f"module failure: {exc}", err=True)
        sys.exit(EXIT_MODULE)


@click.group()
def main() -> None:
    """Procedural video querying."""


@main.command()
@common_options
@click.option("--video", "video_id", required=True)
@click.option("--question", required=True)
@click.option("--options", "options_text", default=None,
              help="Multiple-choice options separated by '|'.")
@click.option("--question-id", default=None, help="Key for fixture program lookup.")
@click.option("--dry-run", is_flag=True, help="Print prompt and program; execute nothing.")
@click.option("--explain", is_flag=True, help="Print the program and per-statement trace.")
def query(config_path, mock_world, fixtures, seed, server, video_id, question,
          options_text, question_id, dry_run, explain) -> None:
    """Answer one question about one video."""
    client = _client(config_path, mock_world, fixtures, seed, server)
    options = [o.strip() for o in options_text.split("|")] if options_text else None
    req = m.QueryRequest(video_id=video_id, question=question, options=options,
                         question_id=question_id, dry_run=dry_run)
    resp = _run(client, "/v1/query", req, m.QueryResponse)
    if resp.outcome == "generation_failure":
        click.echo("program generation failed:", err=True)
        for d in (resp.error or {}).get("diagnostics", []):
            click.echo(f"  {d}", err=True)
        sys.exit(EXIT_GENERATION)
    if dry_run:
        click.echo(resp.prompt or "")
        click.echo("--- generated program ---")
        click.echo(resp.program or "")
        return
    if resp.outcome == "module_failure":
        click.echo(f"module failure: {(resp.error or {}).get('message', '')}", err=True)
        if explain and resp.trace:
            _print_trace(resp.trace)
        sys.exit(EXIT_MODULE)
    click.echo(resp.answer or "")
    if explain:
        click.echo("--- program ---")
        click.echo(resp.program or "")
        click.echo("--- trace ---")
        _print_trace(resp.trace or [])


def _print_trace(trace: list[dict]) -> None:
    for entry in trace:
        if "index" in entry:
            caps = ",".join(f"{k}x{v}" for k, v in entry.get("capabilities", {}).items())
            click.echo(f"  [{entry['index']:>3}] {entry['op']:<16} {entry['args']}"
                       + (f"  ({caps})" if caps else ""))
        else:
            click.echo(f"  outcome: {entry.get('outcome')}"
                       + (f" error: {entry.get('error')}" if entry.get("error") else ""))


@main.command(name="eval")
@common_options
@click.option("--dataset", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Directory for report.json and records.jsonl.")
def eval_command(config_path, mock_world, fixtures, seed, server, dataset, out_dir) -> None:
    """Evaluate a benchmark dataset and write the report and per-record logs."""
    client = _client(config_path, mock_world, fixtures, seed, server)
    resp = _run(client, "/v1/eval", m.EvalRequest(dataset_path=os.path.abspath(dataset)),
                m.EvalResponse)
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(resp.report, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    with open(os.path.join(out_dir, "records.jsonl"), "w", encoding="utf-8") as fh:
        for record in resp.records:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
    counts = resp.report["counts"]
    click.echo(f"accuracy {resp.report['accuracy']:.4f} "
               f"({counts['correct']}/{resp.report['total']})")
    for outcome, count in counts.items():
        if count and outcome != "correct":
            click.echo(f"  {outcome}: {count}")
    click.echo(f"report: {report_path}")


@main.command()
@common_options
@click.option("--video", "video_id", required=True)
@click.option("--predicate", required=True)
@click.option("--mode", type=click.Choice(["remove_matching", "keep_matching"]),
              default="remove_matching")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the segment list and manifest as JSON.")
def edit(config_path, mock_world, fixtures, seed, server, video_id, predicate,
         mode, out_path) -> None:
    """Cut a video into the segments where a predicate holds (or doesn't)."""
    client = _client(config_path, mock_world, fixtures, seed, server)
    resp = _run(client, "/v1/edit", m.EditRequest(video_id=video_id, predicate=predicate,
                                                  mode=mode), m.EditResponse)
    doc = resp.model_dump()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, ensure_ascii=False)
        click.echo(f"wrote {out_path}")
    for s in resp.segments:
        click.echo(f"keep [{s['start_s']:.3f}s, {s['end_s']:.3f}s) "
                   f"frames [{s['start_frame']}, {s['end_frame']})")
    if not resp.segments:
        click.echo("no segments kept")


@main.command()
@common_options
@click.option("--video", "video_id", required=True)
@click.option("--query", "object_query", required=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the JSON-lines track export here.")
def track(config_path, mock_world, fixtures, seed, server, video_id, object_query,
          out_path) -> None:
    """Detect and track every instance of an object query."""
    client = _client(config_path, mock_world, fixtures, seed, server)
    resp = _run(client, "/v1/track", m.TrackRequest(video_id=video_id, query=object_query),
                m.TrackResponse)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            for line in resp.export_lines:
                fh.write(line + "\n")
        click.echo(f"wrote {out_path}")
    if not resp.tracks:
        click.echo("warning: no detections, empty export", err=True)
        return
    for t in resp.tracks:
        click.echo(f"track {t['track_id']}: frames {t['first_frame']}..{t['last_frame']} "
                   f"({t['length']} boxes)")


@main.command()
@common_options
@click.option("--video", "video_id", required=True)
@click.option("--chunk-seconds", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def summarize(config_path, mock_world, fixtures, seed, server, video_id,
              chunk_seconds, out_path) -> None:
    """Produce the narrative paragraph summary of a video."""
    client = _client(config_path, mock_world, fixtures, seed, server)
    resp = _run(client, "/v1/summarize",
                m.SummarizeRequest(video_id=video_id, chunk_seconds=chunk_seconds),
                m.SummarizeResponse)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(resp.model_dump(), fh, indent=2, sort_keys=True, ensure_ascii=False)
        click.echo(f"wrote {out_path}")
    click.echo(resp.paragraph)


@main.command(name="gen-program")
@common_options
@click.option("--question", required=True)
@click.option("--options", "options_text", default=None)
@click.option("--question-id", default=None)
@click.option("--task", "task_kind", default=None,
              type=click.Choice(["qa", "multiple_choice", "edit", "track"]))
def gen_program(config_path, mock_world, fixtures, seed, server, question,
                options_text, question_id, task_kind) -> None:
    """Build the generation prompt and obtain the program, without executing."""
    client = _client(config_path, mock_world, fixtures, seed, server)
    options = [o.strip() for o in options_text.split("|")] if options_text else None
    resp = _run(client, "/v1/gen-program",
                m.GenProgramRequest(question=question, options=options,
                                    task_kind=task_kind, question_id=question_id),
                m.GenProgramResponse)
    click.echo(f"fingerprint: {resp.prompt_fingerprint}")
    if resp.outcome == "generation_failure":
        click.echo("program generation failed:", err=True)
        for d in resp.diagnostics or []:
            click.echo(f"  {d}", err=True)
        sys.exit(EXIT_GENERATION)
    click.echo(resp.program or "")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8080)
def serve(config_path, host, port) -> None:
    """Run the engine as a long-lived HTTP service."""
    import uvicorn

    from .service import create_app
    try:
        config = EngineConfig.load(config_path)
        app = create_app(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    uvicorn.run(app, host=host, port=port)


@main.command(name="mock-backend")
@click.option("--worlds", required=True, type=click.Path(),
              help="Mock world file or directory to serve.")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8091)
def mock_backend(worlds, host, port) -> None:
    """Serve the visual-backend wire protocol from mock worlds."""
    import uvicorn

    from .service import create_backend_app
    from .videos import load_worlds
    try:
        app = create_backend_app(load_worlds(worlds))
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
