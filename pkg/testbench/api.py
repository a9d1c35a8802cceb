#!/usr/bin/env python3
"""
Flask API for the channel-estimation testbench.
Runs demos, sweeps and complexity reports from partial JSON configs.
"""

import logging
import os
from datetime import datetime

from flask import Flask, jsonify, request
from flask_cors import CORS

from testbench import __version__
from testbench.bench.complexity import complexity_report
from testbench.bench.experiment import run_demo, run_sweep
from testbench.config_handler import ConfigHandler
from testbench.defaults_config import (
    API_MAX_SWEEP_RUNS,
    DEFAULT_DIP,
    DEFAULT_EXPERIMENT,
    DEFAULT_STAGE1,
    DEFAULT_SYSTEM,
    METHODS,
)
from testbench.errors import ConfigError, DimensionError

logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)  # Enable CORS for browser front ends

config_handler = ConfigHandler()


def error_response(e: Exception):
    status = 400 if isinstance(e, (ConfigError, DimensionError)) else 500
    if status == 500:
        logger.exception("Request failed")
    return jsonify({
        'success': False,
        'error': str(e)
    }), status


def request_config():
    """Partial experiment config from the JSON body; missing sections take defaults."""
    body = request.get_json(silent=True) or {}
    if not isinstance(body, dict):
        raise ConfigError("Request body must be a JSON object")
    sections = {k: v for k, v in body.items() if k in ('system', 'stage1', 'dip', 'experiment')}
    return body, config_handler.build_experiment(sections)


@app.route('/api/health', methods=['GET'])
def health_check():
    """Health check endpoint."""
    return jsonify({
        'success': True,
        'status': 'healthy',
        'timestamp': datetime.now().isoformat(),
        'version': __version__
    })


@app.route('/api/defaults', methods=['GET'])
def get_defaults():
    """Every config section with its default values."""
    return jsonify({
        'success': True,
        'defaults': {
            'system': DEFAULT_SYSTEM,
            'stage1': DEFAULT_STAGE1,
            'dip': DEFAULT_DIP,
            'experiment': DEFAULT_EXPERIMENT
        },
        'methods': METHODS
    })


@app.route('/api/complexity', methods=['GET'])
def get_complexity():
    """Parameter counts for N_f subcarriers and M antennas."""
    try:
        subcarriers = request.args.get('subcarriers', DEFAULT_SYSTEM['subcarriers'], type=int)
        antennas = request.args.get('antennas', DEFAULT_SYSTEM['antennas'], type=int)
        if subcarriers < 1 or antennas < 1:
            raise ConfigError("subcarriers and antennas must be positive integers")
        return jsonify({
            'success': True,
            'complexity': complexity_report(subcarriers, antennas)
        })
    except Exception as e:
        return error_response(e)


@app.route('/api/demo', methods=['POST'])
def demo():
    """One realization at one SNR: stage-1, pipeline and Bussgang NMSE."""
    try:
        body, cfg = request_config()
        snr_db = body.get('snr_db')
        result = run_demo(cfg, snr_db=None if snr_db is None else float(snr_db),
                          realization=int(body.get('realization', 0)))
        return jsonify({
            'success': True,
            'snr_db': result.snr_db,
            'nmse_db': result.nmse_db,
            'stage1_final_loss': [trace[-1] for trace in result.stage1_traces],
            'dip_final_loss': result.fit_trace[-1] if result.fit_trace else None
        })
    except Exception as e:
        return error_response(e)


@app.route('/api/sweep', methods=['POST'])
def sweep():
    """Sweep over an explicit experiment section; returns rows sorted by (snr, method).

    Sweeps run inside the request, so SNR points x realizations is capped at
    API_MAX_SWEEP_RUNS. Larger sweeps belong on the command line.
    """
    try:
        body, cfg = request_config()
        if 'experiment' not in body:
            raise ConfigError("Sweep requests need an explicit 'experiment' section")
        runs = len(cfg.snr_db) * cfg.realizations
        if runs > API_MAX_SWEEP_RUNS:
            raise ConfigError(f"Sweep has {runs} SNR x realization runs; the API accepts at most "
                              f"{API_MAX_SWEEP_RUNS}. Use the sweep command for larger runs")
        report = run_sweep(cfg)
        return jsonify({
            'success': True,
            'rows': report.to_dicts(),
            'stats': {
                'rowCount': len(report.rows),
                'realizations': cfg.realizations,
                'seed': cfg.seed
            }
        })
    except Exception as e:
        return error_response(e)


if __name__ == '__main__':
    logging.basicConfig(level=os.environ.get('TESTBENCH_LOG_LEVEL', 'INFO').upper(),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    port = int(os.environ.get('PORT', 5001))
    app.run(host='0.0.0.0', port=port, debug=False)
