"""
Driving experiments from a text file
====================================

Every experiment kind can be run from a ``key = value`` description, either
with the ``ergodic-lab`` command or from Python as below.
"""

import tempfile

from ergodic_schrodinger.cli import parse_config, run

text = """
experiment = measure
function.variant = trig
function.constant = 0.0
grid_count = 100
lyapunov_N = 20000
"""

with tempfile.TemporaryDirectory() as out:
    cfg = parse_config(text, {"output_dir": out})
    run(cfg)
