"""Command-line front end.

Every computing subcommand builds a request model, dispatches it — to the
in-process handlers by default, or to a running server when ``--server``
(or ``STEGCAP_SERVER``) is set — and renders the validated response.  File
artifacts (CSV curves, JSON reports) are written client-side, each with a
RunManifest JSON sidecar, so identical arguments and seed produce
byte-identical files; pass ``--no-timestamp`` to drop the one
non-reproducible manifest field.

Exit status: 0 on success, 2 on usage errors, 1 when ``--check`` fails.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone

import click
import httpx
from pydantic import ValidationError

from ._version import TOOL_ID, __version__
from .errors import StegcapError
from .published import read_published_csv
from .service import handlers
from .service import models as m
from .tables import (
    ComparisonRow,
    RateVsNRow,
    write_comparison_csv,
    write_rate_vs_n_csv,
)

_ENDPOINTS = {
    "capacity": ("/v1/capacity", handlers.handle_capacity,
                 m.CapacityResponse),
    "codebook-params": ("/v1/codebook-params",
                        handlers.handle_codebook_params,
                        m.CodebookParamsResponse),
    "rate-vs-n": ("/v1/rate-vs-n", handlers.handle_rate_vs_n,
                  m.RateVsNResponse),
    "payload-vs-pe": ("/v1/payload-vs-pe", handlers.handle_payload_vs_pe,
                      m.PayloadVsPeResponse),
    "detect-sim": ("/v1/detect-sim", handlers.handle_detect_sim,
                   m.DetectionReportModel),
    "decode-sim": ("/v1/decode-sim", handlers.handle_decode_sim,
                   m.DecodingReportModel),
    "gibbs-check": ("/v1/gibbs-check", handlers.handle_gibbs_check,
                    m.GibbsCheckResponse),
}


def _invoke(server: str | None, name: str, request):
    """Run a request in-process, or POST it to ``server`` when given."""
    path, handler, response_cls = _ENDPOINTS[name]
    try:
        if not server:
            return handler(request)
        resp = httpx.post(server.rstrip("/") + path,
                          json=request.model_dump(mode="json"),
                          timeout=600.0)
        if resp.status_code in (400, 422):
            detail = resp.json().get("detail", resp.text)
            raise click.UsageError(f"{name}: {detail}")
        resp.raise_for_status()
        return response_cls.model_validate(resp.json())
    except StegcapError as exc:
        raise click.UsageError(str(exc)) from exc
    except httpx.HTTPError as exc:
        raise click.ClickException(f"server request failed: {exc}") from exc


def _request(model_cls, **kwargs):
    try:
        return model_cls(**kwargs)
    except (ValidationError, StegcapError) as exc:
        raise click.UsageError(str(exc)) from exc


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(command: str, request, seed: int | None, outputs,
                    no_timestamp: bool) -> str:
    manifest = {
        "command": command,
        "parameters": request.model_dump(mode="json"),
        "seed": seed,
        "outputs": [str(p) for p in outputs],
        "tool_version": TOOL_ID,
    }
    if not no_timestamp:
        manifest["timestamp"] = datetime.now(timezone.utc).isoformat()
    path = f"{outputs[0]}.manifest.json"
    _write_json(path, manifest)
    return path


def _cover_spec(n: int | None, sigma2: float, rho: float | None,
                cover_json: str | None, mean: float = 0.0):
    if cover_json is not None:
        if n is not None:
            raise click.UsageError("--cover-json already fixes the model; "
                                   "do not also pass --n")
        with open(cover_json, "r", encoding="utf-8") as fh:
            return _request(m.GaussianModelSpec, **json.load(fh))
    if n is None:
        raise click.UsageError("pass --n (or --cover-json)")
    if rho is None:
        cov = m.ScaledIdentityModel(sigma2=sigma2)
    else:
        cov = m.Ar1Model(sigma2=sigma2, rho=rho)
    return _request(m.GaussianModelSpec, dim=n, mean=mean, covariance=cov)


def _parse_n_list(_ctx, _param, value: str):
    try:
        return [int(tok) for tok in value.split(",") if tok.strip()]
    except ValueError:
        raise click.UsageError(
            f"--n expects a comma-separated integer list, got {value!r}")


_server_option = click.option(
    "--server", envvar="STEGCAP_SERVER", default=None, metavar="URL",
    help="Send the request to a running `stegcap serve` instance instead "
         "of computing in-process.")
_no_timestamp_option = click.option(
    "--no-timestamp", is_flag=True,
    help="Omit the timestamp from the run manifest (byte-identical reruns).")
_seed_option = click.option(
    "--seed", type=int, envvar="STEGCAP_SEED", default=0, show_default=True,
    help="Experiment seed; STEGCAP_SEED supplies the default.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="stegcap")
def main():
    """Steganographic capacity limits for Gaussian cover models."""


@main.command()
@click.option("--epsilon", type=float, default=None,
              help="Detectability budget in [0, 1] (KL budget 2*epsilon^2).")
@click.option("--pe", type=float, default=None,
              help="Average detector error in [0, 0.5] (lower-bound mode).")
@click.option("--n", type=int, required=True, help="Cover size.")
@click.option("--units", type=click.Choice(["nats", "bits"]),
              default="nats", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Write the result as JSON.")
@_no_timestamp_option
@_server_option
def capacity(epsilon, pe, n, units, output, no_timestamp, server):
    """Maximum embedding rate (n/2)·ln a* under the detectability budget."""
    req = _request(m.CapacityRequest, n=n, epsilon=epsilon, pe=pe,
                   units=units)
    resp = _invoke(server, "capacity", req)
    u = resp.units
    click.echo(f"mode               {resp.mode}")
    click.echo(f"n                  {resp.n}")
    click.echo(f"epsilon_effective  {resp.epsilon_effective!r}")
    click.echo(f"gamma              {resp.gamma!r}")
    click.echo(f"embedding_factor   {resp.embedding_factor!r}")
    click.echo(f"rate_total         {resp.rate_total!r} {u}")
    click.echo(f"rate_per_element   {resp.rate_per_element!r} {u}")
    click.echo(f"srl_bound          {resp.srl_bound!r} {u}")
    click.echo(f"achievable_rate    {resp.achievable_rate!r} {u}")
    d = resp.detection
    clamp = " (clamped, vacuous)" if d.clamped else ""
    click.echo(f"detection          p_d <= {d.p_d_max!r}, p_e >= "
               f"{d.p_e_min!r}, P_E >= {d.p_e_avg_min!r}{clamp}")
    click.echo(f"assumption         {resp.assumption}")
    if output:
        _write_json(output, resp.model_dump(mode="json"))
        _write_manifest("capacity", req, None, [output], no_timestamp)


@main.command("codebook-params")
@click.option("--epsilon", type=float, default=None)
@click.option("--pe", type=float, default=None)
@click.option("--n", type=int, default=None, help="Cover size (iid/AR(1)).")
@click.option("--sigma2", type=float, default=1.0, show_default=True,
              help="Cover variance per element.")
@click.option("--rho", type=float, default=None,
              help="AR(1) correlation; omit for an iid cover.")
@click.option("--cover-json", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Full Gaussian cover spec as JSON.")
@click.option("--units", type=click.Choice(["nats", "bits"]),
              default="nats", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@_no_timestamp_option
@_server_option
def codebook_params(epsilon, pe, n, sigma2, rho, cover_json, units, output,
                    no_timestamp, server):
    """Optimal codeword distribution: zero mean, (a*-1) times the cover."""
    cover = _cover_spec(n, sigma2, rho, cover_json)
    req = _request(m.CodebookParamsRequest, cover=cover, epsilon=epsilon,
                   pe=pe, units=units)
    resp = _invoke(server, "codebook-params", req)
    click.echo(f"n                 {resp.n}")
    click.echo(f"embedding_factor  {resp.embedding_factor!r}")
    click.echo(f"rate_total        {resp.rate_total!r} {resp.units}")
    click.echo(f"rate_per_element  {resp.rate_per_element!r} {resp.units}")
    click.echo("message           "
               + json.dumps(resp.message.model_dump(mode="json"),
                            sort_keys=True))
    if output:
        _write_json(output, resp.model_dump(mode="json"))
        _write_manifest("codebook-params", req, None, [output], no_timestamp)


@main.command("rate-vs-n")
@click.option("--pe", "pe_values", type=float, multiple=True, required=True,
              help="Average detector error level; repeat for several curves.")
@click.option("--n-min", type=int, default=100, show_default=True)
@click.option("--n-max", type=int, default=10 ** 6, show_default=True)
@click.option("--count", type=int, default=81, show_default=True,
              help="Points on the logarithmic n grid.")
@click.option("--output", type=click.Path(dir_okay=False), required=True,
              help="Destination CSV.")
@_no_timestamp_option
@_server_option
def rate_vs_n(pe_values, n_min, n_max, count, output, no_timestamp, server):
    """Capacity-lower-bound curves over a logarithmic n grid (CSV)."""
    req = _request(m.RateVsNRequest, p_e_values=list(pe_values), n_min=n_min,
                   n_max=n_max, count=count)
    resp = _invoke(server, "rate-vs-n", req)
    rows = [RateVsNRow(**r.model_dump()) for r in resp.rows]
    write_rate_vs_n_csv(output, rows)
    _write_manifest("rate-vs-n", req, None, [output], no_timestamp)
    click.echo(f"wrote {len(rows)} rows ({len(pe_values)} curve(s)) "
               f"to {output}")


@main.command("payload-vs-pe")
@click.option("--n", type=int, default=2 ** 18, show_default=True,
              help="Cover size (default 512 x 512 elements).")
@click.option("--pe-min", type=float, default=0.05, show_default=True)
@click.option("--pe-max", type=float, default=0.45, show_default=True)
@click.option("--pe-count", type=int, default=41, show_default=True)
@click.option("--published", type=click.Path(exists=True, dir_okay=False),
              default=None,
              help="CSV of reported operating points to overlay "
                   "(method,steganalyzer,payload_bpp,pe,source).")
@click.option("--output", type=click.Path(dir_okay=False), required=True,
              help="Destination CSV (theory curve plus overlay rows).")
@_no_timestamp_option
@_server_option
def payload_vs_pe(n, pe_min, pe_max, pe_count, published, output,
                  no_timestamp, server):
    """Theoretical payload (bpp) vs blind error, with published overlays."""
    if pe_count < 1:
        raise click.UsageError("--pe-count must be >= 1")
    if pe_count == 1:
        grid = [pe_min]
    else:
        stepw = (pe_max - pe_min) / (pe_count - 1)
        grid = [pe_min + i * stepw for i in range(pe_count)]
    points = []
    if published is not None:
        try:
            parsed = read_published_csv(published)
        except StegcapError as exc:
            raise click.UsageError(str(exc)) from exc
        points = [m.PublishedPointModel(
            method=p.method, steganalyzer=p.steganalyzer,
            payload_bpp=p.payload_bpp, pe=p.p_e_avg, source=p.source)
            for p in parsed]
    req = _request(m.PayloadVsPeRequest, n=n, p_e_values=grid, points=points)
    resp = _invoke(server, "payload-vs-pe", req)
    rows = [ComparisonRow(series="theory", method="", steganalyzer="",
                          p_e=r.p_e, payload_bpp=r.payload_bpp,
                          theory_bpp=r.payload_bpp, above_curve=None,
                          source="")
            for r in resp.rows]
    rows += [ComparisonRow(series="published", method=f.point.method,
                           steganalyzer=f.point.steganalyzer,
                           p_e=f.point.pe, payload_bpp=f.point.payload_bpp,
                           theory_bpp=f.theory_bpp,
                           above_curve=f.above_curve, source=f.point.source)
             for f in resp.flags]
    write_comparison_csv(output, rows)
    _write_manifest("payload-vs-pe", req, None, [output], no_timestamp)
    for f in resp.flags:
        if f.above_curve:
            click.echo(f"ABOVE CURVE: {f.point.method}/"
                       f"{f.point.steganalyzer} payload "
                       f"{f.point.payload_bpp!r} bpp at P_E {f.point.pe!r} "
                       f"exceeds theoretical {f.theory_bpp!r} bpp")
    click.echo(f"{resp.flagged_count} of {len(resp.flags)} published "
               f"points lie above the theoretical curve")
    click.echo(f"wrote {len(rows)} rows to {output}")


@main.command("detect-sim")
@click.option("--n", type=int, default=None, help="Cover size (iid/AR(1)).")
@click.option("--epsilon", type=float, required=True,
              help="Detectability budget in (0, 1).")
@click.option("--trials", type=int, default=100_000, show_default=True)
@_seed_option
@click.option("--sigma2", type=float, default=1.0, show_default=True)
@click.option("--rho", type=float, default=None,
              help="AR(1) correlation; omit for an iid cover.")
@click.option("--cover-json", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--step", type=float, default=None,
              help="Quantize samples to this grid step before detection.")
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Write the full report as JSON.")
@click.option("--check", is_flag=True,
              help="Exit 1 unless the empirical error respects the bound.")
@_no_timestamp_option
@_server_option
@click.pass_context
def detect_sim(ctx, n, epsilon, trials, seed, sigma2, rho, cover_json, step,
               output, check, no_timestamp, server):
    """Likelihood-ratio detection of optimal embedding, Monte Carlo."""
    cover = _cover_spec(n, sigma2, rho, cover_json)
    grid = m.GridModel(step=step) if step is not None else None
    req = _request(m.DetectSimRequest, cover=cover, epsilon=epsilon,
                   trials=trials, seed=seed, grid=grid)
    resp = _invoke(server, "detect-sim", req)
    click.echo(f"n                 {resp.n}")
    click.echo(f"epsilon           {resp.epsilon!r}")
    click.echo(f"embedding_factor  {resp.embedding_factor!r}")
    click.echo(f"trials            {resp.trials} (seed {resp.seed})")
    click.echo(f"alpha_hat         {resp.alpha_hat!r}")
    click.echo(f"beta_hat          {resp.beta_hat!r}")
    click.echo(f"p_e_hat           {resp.p_e_hat!r} +/- {resp.std_err!r}")
    click.echo(f"p_e_bound         {resp.p_e_bound!r} (1 - epsilon)")
    click.echo(f"passed            {str(resp.passed).lower()}")
    if output:
        _write_json(output, resp.model_dump(mode="json"))
        _write_manifest("detect-sim", req, seed, [output], no_timestamp)
    if check and not resp.passed:
        ctx.exit(1)


@main.command("decode-sim")
@click.option("--rate-fraction", type=float, required=True,
              help="Codebook rate as a fraction of the closed-form limit.")
@click.option("--n", "n_list", callback=_parse_n_list, required=True,
              metavar="N1,N2,...", help="Comma-separated cover sizes.")
@click.option("--epsilon", type=float, default=0.5, show_default=True)
@click.option("--trials", type=int, default=20_000, show_default=True)
@_seed_option
@click.option("--sigma2", type=float, default=1.0, show_default=True)
@click.option("--rho", type=float, default=None,
              help="AR(1) correlation; omit for an iid cover.")
@click.option("--mean", "mean_value", type=float, default=0.0,
              show_default=True)
@click.option("--step", type=float, default=None,
              help="Quantize stego samples to this grid step.")
@click.option("--codebook-size", type=int, default=None,
              help="Pin the codebook size instead of deriving it.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--check", is_flag=True,
              help="Exit 1 unless the error trend is nonincreasing in n.")
@_no_timestamp_option
@_server_option
@click.pass_context
def decode_sim(ctx, rate_fraction, n_list, epsilon, trials, seed, sigma2,
               rho, mean_value, step, codebook_size, output, check,
               no_timestamp, server):
    """Random-codebook achievability experiment over a sweep of n."""
    if rho is None:
        cov = m.ScaledIdentityModel(sigma2=sigma2)
    else:
        cov = m.Ar1Model(sigma2=sigma2, rho=rho)
    grid = m.GridModel(step=step) if step is not None else None
    req = _request(m.DecodeSimRequest, covariance=cov, epsilon=epsilon,
                   rate_fraction=rate_fraction, n_list=n_list, trials=trials,
                   seed=seed, mean_value=mean_value, grid=grid,
                   codebook_size_override=codebook_size)
    resp = _invoke(server, "decode-sim", req)
    click.echo(f"epsilon {resp.epsilon!r}  rate_fraction "
               f"{resp.rate_fraction!r}  seed {resp.seed}  decoder "
               f"{resp.decoder}")
    for e in resp.entries:
        click.echo(f"n={e.n:>6}  K={e.codebook_size:>6}  "
                   f"rate={e.rate_nats!r} nats  capacity={e.capacity_nats!r} "
                   f"nats  P_B={e.p_b_hat!r} +/- {e.std_err!r}")
    click.echo(f"monotone_trend    {str(resp.monotone_trend).lower()}")
    if output:
        _write_json(output, resp.model_dump(mode="json"))
        _write_manifest("decode-sim", req, seed, [output], no_timestamp)
    if check and not resp.monotone_trend:
        ctx.exit(1)


@main.command("gibbs-check")
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="MRF spec JSON (sites, neighbors, cliques, alphabet, "
                   "temperature, potentials).")
@click.option("--tolerance", type=float, default=1e-12, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--check", is_flag=True,
              help="Exit 1 unless the pmf difference is within tolerance.")
@_no_timestamp_option
@_server_option
@click.pass_context
def gibbs_check(ctx, spec_path, tolerance, output, check, no_timestamp,
                server):
    """Compare a disjoint-clique Gibbs pmf with its quantized Gaussian."""
    with open(spec_path, "r", encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"{spec_path}: {exc}") from exc
    req = _request(m.GibbsCheckRequest, spec=spec, tolerance=tolerance)
    resp = _invoke(server, "gibbs-check", req)
    click.echo(f"sites         {resp.sites}")
    click.echo(f"state_count   {resp.state_count}")
    click.echo(f"max_abs_diff  {resp.max_abs_diff!r}")
    click.echo(f"tolerance     {resp.tolerance!r}")
    click.echo("equivalent    " + str(resp.passed).lower())
    if output:
        _write_json(output, resp.model_dump(mode="json"))
        _write_manifest("gibbs-check", req, None, [output], no_timestamp)
    if check and not resp.passed:
        ctx.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service (uvicorn)."""
    import uvicorn

    uvicorn.run("stegcap.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
