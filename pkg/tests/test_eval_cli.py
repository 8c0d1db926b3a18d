"""Evaluation reports, context sweeps, latent export, and the CLI surface."""

import json

import numpy as np
import pytest
import torch

from pcsim.cli import main as cli_main
from pcsim.evaluation import EvalReport, context_sweep, evaluate_model, export_latents, pca_2d, spearman
from pcsim.training import ModelConfig, SimulationModel, load_dataset, load_model, train

from test_training import tiny_model_cfg, tiny_train_cfg

torch.set_num_threads(1)


@pytest.fixture(scope="module")
def trained(tiny_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    result = train(tiny_train_cfg(steps=8), tiny_dataset, out / "run")
    model, _ = load_model(result.checkpoint, tiny_model_cfg())
    ds = load_dataset(tiny_dataset)
    return model, ds, result


class PerfectStub:
    """Replays the ground truth in evaluation order: an exact predictor."""

    variant = "nocontext"

    def __init__(self, ds, split, reserve):
        self.queue = []
        for task_id in ds.split_ids(split):
            n = len(ds.tasks[task_id].trajectories)
            for idx in range(min(reserve, n - 1), n):
                self.queue.append(ds.target_graph(task_id, idx, None)[1])

    def rollout(self, graph, cond=None):
        return self.queue.pop(0)


class TestEvaluate:
    def test_perfect_predictor_stub_zero(self, trained):
        _, ds, _ = trained
        stub = PerfectStub(ds, "test", reserve=2)
        report = evaluate_model(stub, ds, "test", context_size=1, context_reserve=2)
        assert report.mean == 0.0 and report.std == 0.0

    def test_aggregate_matches_recomputation(self, trained):
        model, ds, _ = trained
        report = evaluate_model(model, ds, "test", context_size=2, context_reserve=2)
        per_task = {}
        for row in report.rows:
            per_task.setdefault(row["task_id"], []).append(row["value"])
        for task_id, values in per_task.items():
            assert report.task_means[task_id] == pytest.approx(float(np.mean(values)), rel=1e-15)
        assert report.mean == pytest.approx(float(np.mean(list(report.task_means.values()))), rel=1e-15)

    def test_report_roundtrip(self, trained, tmp_path):
        model, ds, _ = trained
        report = evaluate_model(model, ds, "test", context_size=2, context_reserve=2)
        path = tmp_path / "report.json"
        report.save(path)
        loaded = json.loads(path.read_text())
        assert loaded["mean"] == report.mean
        assert (tmp_path / "report.csv").exists()

    def test_deterministic(self, trained):
        model, ds, _ = trained
        a = evaluate_model(model, ds, "test", context_size=2, context_reserve=2)
        b = evaluate_model(model, ds, "test", context_size=2, context_reserve=2)
        assert a.to_dict() == b.to_dict()

    def test_report_bitwise_reproducible_from_checkpoint(self, trained, tmp_path):
        _, ds, result = trained
        outs = []
        for name in ("r1", "r2"):
            model, _ = load_model(result.checkpoint, tiny_model_cfg())
            report = evaluate_model(model, ds, "test", context_size=2, context_reserve=2)
            report.save(tmp_path / f"{name}.json")
            outs.append((tmp_path / f"{name}.json").read_bytes())
        assert outs[0] == outs[1]

    def test_p2m_zero_on_ground_truth(self, trained):
        model, ds, _ = trained
        from pcsim.evaluation import _p2m_value

        task_id = ds.split_ids("test")[0]
        rec = ds.tasks[task_id]
        gt = ds.norm_positions(rec.trajectories[1].traj.positions)
        assert _p2m_value(ds, task_id, 1, gt) < 1e-6

    def test_oracle_ignores_context_size(self, tiny_dataset, tmp_path):
        cfg = tiny_train_cfg(steps=3)
        cfg.model = ModelConfig(variant="oracle", encoder=cfg.model.encoder, sdf=cfg.model.sdf,
                                mp_blocks=2, time_dim=4)
        result = train(cfg, tiny_dataset, tmp_path / "oracle")
        model, _ = load_model(result.checkpoint, cfg.model)
        ds = load_dataset(tiny_dataset)
        r1 = evaluate_model(model, ds, "test", context_size=1, context_reserve=2)
        r8 = evaluate_model(model, ds, "test", context_size=2, context_reserve=2)
        assert r1.to_dict()["task_means"] == r8.to_dict()["task_means"]


class TestContextSweep:
    def test_entry_per_context_size(self, trained):
        model, ds, _ = trained
        reports = context_sweep(model, ds, split="test", c_list=(1, 2, 3))
        assert [r.context_size for r in reports] == [1, 2, 3]

    def test_reproducible(self, trained):
        model, ds, _ = trained
        a = context_sweep(model, ds, split="test", c_list=(1, 2))
        b = context_sweep(model, ds, split="test", c_list=(1, 2))
        assert [r.mean for r in a] == [r.mean for r in b]

    def test_shared_targets_across_context_sizes(self, trained):
        model, ds, _ = trained
        reports = context_sweep(model, ds, split="test", c_list=(1, 2))
        keys = [{(row["task_id"], row["traj_id"]) for row in r.rows} for r in reports]
        assert keys[0] == keys[1]


class TestLatents:
    def test_export_table(self, trained, tmp_path):
        model, ds, _ = trained
        out = tmp_path / "latents.csv"
        export_latents(model, ds, out, context_size=2)
        lines = out.read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header[:4] == ["task_id", "E", "nu", "tau_visc"]
        assert header[-2:] == ["pc1", "pc2"]
        assert len(lines) - 1 == len(ds.split_ids("test"))

    def test_pca_orthonormal(self, rng):
        rows = rng.standard_normal((20, 8))
        axes, coords = pca_2d(rows)
        assert abs(float(axes[0] @ axes[1])) <= 1e-10
        assert float(axes[0] @ axes[0]) == pytest.approx(1.0, rel=1e-10)
        assert coords.shape == (20, 2)

    def test_spearman_perfect_monotone(self, rng):
        x = rng.standard_normal(30)
        assert spearman(x, np.exp(x)) == pytest.approx(1.0)
        assert spearman(x, -x) == pytest.approx(-1.0)


class TestCli:
    def test_unknown_command_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli_main(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_flag_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            cli_main(["gradcheck", "--wat"])
        assert exc.value.code == 2

    def test_eval_missing_ckpt_flag_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli_main(["eval", "--data", "x", "--report", "y"])
        assert exc.value.code == 2
        assert "--ckpt" in capsys.readouterr().err

    def test_gradcheck_exit_0(self):
        assert cli_main(["gradcheck", "--seed", "0", "--component", "aggregate"]) == 0

    def test_train_and_eval_flow(self, tiny_dataset, tmp_path):
        # the CLI trains with the default full-size model configuration
        out = tmp_path / "cli_run"
        code = cli_main([
            "train", "--data", str(tiny_dataset), "--out", str(out), "--model", "nocontext",
            "--seed", "1", "--steps", "2", "--val-every", "2",
        ])
        assert code == 0
        report = tmp_path / "rep.json"
        code = cli_main([
            "eval", "--ckpt", str(out / "best.ckpt"), "--data", str(tiny_dataset),
            "--split", "test", "--context", "2", "--report", str(report),
        ])
        assert code == 0 and report.exists()

    def test_gen_data_cli(self, tmp_path):
        config = {
            "n_train": 2, "n_val": 1, "n_test": 1, "trajectories_per_task": 1,
            "internal_steps": 10, "output_frames": 5,
            "ranges": {"length": [2.0, 0.2], "mesh_h": [0.25, 0.01]},
            "observation": {"points_per_frame": 16, "frame_stride": 2},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        code = cli_main(["gen-data", "--config", str(cfg_path), "--out", str(tmp_path / "d"), "--seed", "5"])
        assert code == 0 and (tmp_path / "d" / "manifest.json").exists()

    def test_latents_cli(self, trained, tiny_dataset, tmp_path):
        _, _, result = trained
        out = tmp_path / "lat.csv"
        code = cli_main(["latents", "--ckpt", str(result.checkpoint), "--data", str(tiny_dataset), "--out", str(out)])
        assert code == 0 and out.exists()

    def test_error_exit_1(self, tmp_path, capsys):
        code = cli_main(["eval", "--ckpt", str(tmp_path / "missing.ckpt"), "--data", str(tmp_path),
                         "--report", str(tmp_path / "r.json")])
        assert code == 1
        assert "error:" in capsys.readouterr().err
