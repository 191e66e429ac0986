"""Thin-client command line interface.

Every subcommand talks to the HTTP service: against a remote server when
--server is given, otherwise against an in-process instance of the app, so the
CLI works standalone while exercising the same request/response surface.
"""

from __future__ import annotations

import json
import sys

import click
import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app
    return TestClient(create_app())


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; defaults to in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Invariant spectral regression: fit, predict, measure, experiment."""
    ctx.obj = server


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--method", default=None, help="Method name from the config (default: first).")
@click.option("--n", default=None, type=int, help="Training size (default: first n_train).")
@click.option("--seed", default=None, type=int, help="Seed (default: first in config).")
@click.pass_obj
def fit(server: str | None, config_path: str, out_path: str,
        method: str | None, n: int | None, seed: int | None) -> None:
    """Fit one model from a config and write its JSON document."""
    payload = {"config": _load_json(config_path), "method": method, "n": n, "seed": seed}
    with _client(server) as client:
        document = _post(client, "/fit", payload)["model"]
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")
    click.echo(f"wrote model to {out_path}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--point", required=True, help="Comma-separated coordinates, e.g. '0.1,-0.5'.")
@click.pass_obj
def predict(server: str | None, model_path: str, point: str) -> None:
    """Evaluate a saved model at one point; prints one float."""
    try:
        coords = [float(part) for part in point.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise click.ClickException(f"could not parse point {point!r}") from exc
    payload = {"model": _load_json(model_path), "point": coords}
    with _client(server) as client:
        value = _post(client, "/predict", payload)["value"]
    click.echo(format(value, ".17g"))


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.pass_obj
def discrepancy(server: str | None, model_path: str, config_path: str) -> None:
    """Invariance discrepancy of a saved model; prints value and sampled flag."""
    payload = {"model": _load_json(model_path), "config": _load_json(config_path)}
    with _client(server) as client:
        data = _post(client, "/discrepancy", payload)
    flag = "sampled" if data["sampled"] else "exhaustive"
    click.echo(f"{format(data['invariance_discrepancy'], '.17g')} {flag}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--timing/--no-timing", default=True,
              help="--no-timing zeroes wall times for byte-reproducible output.")
@click.pass_obj
def experiment(server: str | None, config_path: str, out_path: str, timing: bool) -> None:
    """Run a full experiment config and write the metrics CSV."""
    payload = {"config": _load_json(config_path), "include_timing": timing}
    with _client(server) as client:
        text = _post(client, "/experiment", payload)["csv"]
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    click.echo(f"wrote {text.count(chr(10)) - 1} rows to {out_path}")


@main.command()
@click.pass_obj
def verify(server: str | None) -> None:
    """Run the oracle/property suites; nonzero exit on any failure."""
    with _client(server) as client:
        data = _post(client, "/verify", {})
    for check in data["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        click.echo(f"[{status}] {check['name']}: {check['detail']}")
    if not data["passed"]:
        sys.exit(1)
    click.echo("all checks passed")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
