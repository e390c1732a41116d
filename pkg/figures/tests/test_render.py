import json
import subprocess
import sys

import pytest

from figscripts import (
    common,
    convergence,
    coupling_scatter,
    decay,
    distance_stats,
    sweep_heatmap,
    threshold_band,
    trial_heatmap,
)
from figscripts.common import SchemaError

FIXTURES = {
    "fig2_decay.csv": (
        decay,
        "t_us,p_qubit,coherence_abs\n"
        "0.0,1.0,0.5\n10.0,0.9,0.45\n20.0,0.8,0.42\n30.0,0.72,0.4\n",
    ),
    "fig3_trials.csv": (
        trial_heatmap,
        "trial_id,t_us,p_qubit\n"
        "0,0.0,1.0\n0,10.0,0.8\n0,20.0,0.6\n"
        "1,0.0,1.0\n1,10.0,0.95\n1,20.0,0.9\n",
    ),
    "fig4_stats.csv": (
        distance_stats,
        "trial_id,seed,t1_us,t1_lower_bound_us,t2_us,oscillatory,"
        "distance_um,pe_hz,delta0_norm,omega_hz,category\n"
        "0,1,120.0,nan,240.0,0,0.1,90000.0,0.4,36000.0,<0.3um\n"
        "1,2,250.0,nan,nan,0,2.0,20000.0,0.8,16000.0,0.3-5um\n"
        "2,3,300.0,nan,nan,1,80.0,9000.0,0.9,8100.0,>5um\n",
    ),
    "fig4_convergence.csv": (
        convergence,
        "k,t1_us,trial_id\n"
        "1,5000.0,0\n50,400.0,0\n200,250.0,0\n"
        "1,300.0,1\n50,260.0,1\n200,255.0,1\n",
    ),
    "fig5_sweep.csv": (
        sweep_heatmap,
        "dipole_debye,t1min_us,t1_us,oscillatory\n"
        "1.1,0.01,3000.0,0\n1.1,1.0,800.0,0\n1.1,100.0,2000.0,1\n"
        "4.0,0.01,700.0,0\n4.0,1.0,90.0,1\n4.0,100.0,400.0,1\n",
    ),
    "fig5_threshold.csv": (
        threshold_band,
        "dipole_debye,threshold_mean_us,threshold_std_us\n"
        "1.1,3.2,1.5\n2.0,1.4,0.8\n3.0,0.6,0.3\n4.0,0.25,0.12\n",
    ),
}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_renders_documented_schema(tmp_path, name):
    module, text = FIXTURES[name]
    src = tmp_path / name
    src.write_text(text)
    out = tmp_path / (name + ".png")
    assert module.main(["--in", str(src), "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 1000


def test_coupling_scatter_renders(tmp_path):
    _, text = FIXTURES["fig4_stats.csv"]
    src = tmp_path / "fig4_stats.csv"
    src.write_text(text)
    out = tmp_path / "scatter.png"
    assert coupling_scatter.main(["--in", str(src), "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 1000


def test_schema_mismatch_names_columns(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("t_us,wrong\n0.0,1.0\n")
    out = tmp_path / "out.png"
    with pytest.raises(SchemaError, match="p_qubit"):
        decay.render(src, out)
    assert not out.exists()


def test_empty_csv_writes_no_image(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("t_us,p_qubit,coherence_abs\n")
    out = tmp_path / "out.png"
    with pytest.raises(SchemaError, match="no data rows"):
        decay.render(src, out)
    assert not out.exists()


def test_read_csv_rejects_missing_file(tmp_path):
    with pytest.raises(OSError):
        common.read_csv(tmp_path / "nope.csv", ("a",))


def test_rendering_is_idempotent(tmp_path):
    module, text = FIXTURES["fig2_decay.csv"]
    src = tmp_path / "fig2_decay.csv"
    src.write_text(text)
    out = tmp_path / "out.png"
    module.main(["--in", str(src), "--out", str(out)])
    first = out.read_bytes()
    module.main(["--in", str(src), "--out", str(out)])
    assert out.read_bytes() == first


@pytest.mark.integration
def test_renders_real_cli_outputs(tmp_path):
    """End-to-end: run the simulator CLI at desk scale and render every
    CSV it emits with the matching script."""
    config = {
        "ensemble": {"n_total": 100_000, "retain_k": 25, "seed": 0},
        "integrator": {"horizon": 300.0, "output_points": 400},
        "synthetic": {"spacing": 7.5},
        "workers": 2,
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))

    def cli(*args):
        proc = subprocess.run(
            [sys.executable, "-m", "tlsbath.cli", *args],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return proc

    run_dir = tmp_path / "trials"
    cli(
        "trials", "--config", str(cfg_path), "--seed", "5", "--trials", "3",
        "--with-t2", "--out", str(run_dir),
    )
    conv_dir = tmp_path / "conv"
    cli(
        "convergence", "--config", str(cfg_path), "--seed", "5", "--trials", "2",
        "--k-list", "1,10,25", "--out", str(conv_dir),
    )
    sweep_dir = tmp_path / "sweep"
    cli(
        "sweep", "--config", str(cfg_path), "--seed", "5",
        "--dipole-grid", "1.1,4.0", "--t1min-grid", "0.05,0.5,5.0",
        "--out", str(sweep_dir),
    )

    renders = [
        (decay, run_dir / "fig2_decay.csv"),
        (trial_heatmap, run_dir / "fig3_trials.csv"),
        (distance_stats, run_dir / "fig4_stats.csv"),
        (coupling_scatter, run_dir / "fig4_stats.csv"),
        (convergence, conv_dir / "fig4_convergence.csv"),
        (sweep_heatmap, sweep_dir / "fig5_sweep.csv"),
    ]
    for module, csv_path in renders:
        assert csv_path.exists(), f"CLI did not produce {csv_path}"
        out = tmp_path / (csv_path.stem + ".png")
        assert module.main(["--in", str(csv_path), "--out", str(out)]) == 0
        assert out.exists() and out.stat().st_size > 1000
