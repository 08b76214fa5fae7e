#!/usr/bin/env python3
"""End-to-end exercise of the command-line binary.

Usage: cli_smoke.py <path-to-mortal-world>
Checks each subcommand and the documented exit codes.
"""

import json
import os
import subprocess
import sys
import tempfile

CONFIG = """
[env]
kind = "grid_forage"
width = 5
height = 5
food_cells = [[2, 2]]
leak = 0.1

[run]
num_seeds = 3
max_steps = 15
base_seed = 2
health_every = 5
health_horizon = 8
health_rollouts = 30

[agent]
kind = "random"
"""

JAR_CONFIG = """
[env]
kind = "jar_chain"
chain_length = 5
irreversible_edge = 1
last_state_terminal = true

[run]
num_seeds = 2
max_steps = 10
"""

VALID_MDP = {
    "num_states": 2,
    "num_actions": 2,
    "terminal": [1],
    "transition": [[[0.5, 0.5], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]],
}

INVALID_MDP = {
    "num_states": 2,
    "num_actions": 2,
    "terminal": [1],
    "transition": [[[0.5, 0.4], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]],
}


def run(binary, *args, cwd=None):
    env = dict(os.environ, MORTAL_WORLD_THREADS="2")
    return subprocess.run([binary, *args], capture_output=True, text=True,
                          cwd=cwd, env=env)


def expect(proc, code, what):
    if proc.returncode != code:
        print(f"FAIL {what}: exit {proc.returncode} != {code}")
        print(proc.stdout)
        print(proc.stderr)
        sys.exit(1)
    print(f"ok: {what}")


def main():
    binary = os.path.abspath(sys.argv[1])
    with tempfile.TemporaryDirectory() as tmp:
        config_path = os.path.join(tmp, "run.toml")
        with open(config_path, "w") as f:
            f.write(CONFIG)
        jar_path = os.path.join(tmp, "jar.toml")
        with open(jar_path, "w") as f:
            f.write(JAR_CONFIG)
        mdp_path = os.path.join(tmp, "mdp.json")
        with open(mdp_path, "w") as f:
            json.dump(VALID_MDP, f)
        bad_path = os.path.join(tmp, "bad.json")
        with open(bad_path, "w") as f:
            json.dump(INVALID_MDP, f)
        grid_path = os.path.join(tmp, "grid.toml")
        with open(grid_path, "w") as f:
            f.write("env.leak = [0.1, 0.3]\n")

        proc = run(binary, "simulate", config_path, cwd=tmp)
        expect(proc, 0, "simulate")
        json.loads(proc.stdout)  # summary must be valid JSON

        expect(run(binary, "empowerment-map", mdp_path, "--n", "2",
                   "--out", os.path.join(tmp, "map.csv")), 0,
               "empowerment-map on mdp.json")
        with open(os.path.join(tmp, "map.csv")) as f:
            assert f.readline().strip() == "state_id,label,bits,gap"

        expect(run(binary, "empowerment-map", jar_path, "--n", "1",
                   "--out", os.path.join(tmp, "jar_map.csv")), 0,
               "empowerment-map on a config")

        expect(run(binary, "viability", jar_path,
                   "--out", os.path.join(tmp, "viability.json")), 0, "viability")
        with open(os.path.join(tmp, "viability.json")) as f:
            doc = json.load(f)
        assert "members" in doc and "integrity" in doc

        expect(run(binary, "sweep", config_path, "--grid", grid_path, cwd=tmp),
               0, "sweep")
        assert os.path.exists(os.path.join(tmp, "sweep_out", "sweep.csv"))

        expect(run(binary, "validate", mdp_path), 0, "validate ok")
        expect(run(binary, "validate", bad_path), 2, "validate flags bad rows")
        expect(run(binary, "simulate", os.path.join(tmp, "missing.toml")), 2,
               "missing config is a config error")

        bad_cfg = os.path.join(tmp, "bad_env.toml")
        with open(bad_cfg, "w") as f:
            f.write('[env]\nkind = "marsh"\n')
        expect(run(binary, "simulate", bad_cfg), 2, "unknown env kind")

        expect(run(binary, "empowerment-map", mdp_path, "--n", "25"), 3,
               "enumeration cap exit code")

    print("cli smoke passed")


if __name__ == "__main__":
    main()
