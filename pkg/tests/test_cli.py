"""End-to-end runs of the subcommands through the error boundary."""
import argparse
import json

import pytest

import index
from components.common import resolve_seed, resolve_workers
from utils.constants import DEFAULT_SEED, EXIT_INPUT_ERROR, EXIT_OK
from utils.validation import ValidationError


def _rows(path):
    return [line for line in path.read_text().splitlines() if not line.startswith('#')][1:]


def test_validate_unit_square(tmp_path):
    out = tmp_path / 'validate.csv'
    code = index.run(['validate', '--domain', 'unit_square', '--kind', 'dirichlet',
                      '--r', '0.6,1.0,1.5', '--out', str(out)])
    assert code == EXIT_OK
    text = out.read_text()
    assert 'dirichlet_laplace' in text
    assert 'lieb' in text
    assert 'hersch_protter' in text


def test_validate_is_byte_identical(tmp_path):
    argv = ['validate', '--domain', 'unit_square', '--kind', 'dirichlet', '--r', '0.8,1.2',
            '--mode', 'estimate', '--samples', '500', '--seed', '11']
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    assert index.run(argv + ['--out', str(first)]) == EXIT_OK
    assert index.run(argv + ['--out', str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_bound_json_output(capsys):
    code = index.run(['bound', '--domain', 'unit_square', '--kind', 'robin', '--sigma', '1',
                      '--r', '1.0', '--format', 'json', '--seed', '3'])
    assert code == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    names = [row['name'] for row in document['rows']]
    assert 'robin_thm_main' in names
    assert 'kovarik' in names
    assert 'seed=3' in document['title']


def test_eig_reports_reference(tmp_path):
    out = tmp_path / 'eig.csv'
    code = index.run(['eig', '--domain', 'unit_square', '--kind', 'dirichlet',
                      '--eig-h', '0.0625', '--out', str(out)])
    assert code == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 1
    assert 'dirichlet_laplace' in rows[0]


def test_sweep_rows(tmp_path):
    out = tmp_path / 'sweep.csv'
    code = index.run(['sweep', '--domain', 'unit_square', '--kind', 'dirichlet',
                      '--r', '0.6,1.0', '--out', str(out)])
    assert code == EXIT_OK
    assert len(_rows(out)) == 3


def test_sweep_first_order_poly(tmp_path):
    out = tmp_path / 'sweep_poly.csv'
    code = index.run(['sweep', '--domain', 'unit_square', '--kind', 'poly', '--m', '1',
                      '--r', '1.0', '--out', str(out)])
    assert code == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 2
    assert 'davies_lieb1' in rows[0]
    assert 'davies_lieb2' in rows[1]


def test_oracle_small_run(tmp_path):
    out = tmp_path / 'oracle.csv'
    code = index.run(['oracle', '--trials', '20', '--elementary-trials', '500', '--points', '3',
                      '--samples', '400', '--out', str(out)])
    assert code == EXIT_OK
    text = out.read_text()
    assert 'elementary_inequality' in text
    assert 'pointwise_lemma' in text


# ===== Input Errors =====

def test_missing_domain():
    assert index.run(['bound', '--domain', 'does_not_exist.json', '--kind', 'dirichlet']) == EXIT_INPUT_ERROR


def test_robin_needs_sigma():
    assert index.run(['bound', '--domain', 'unit_square', '--kind', 'robin']) == EXIT_INPUT_ERROR


def test_heisenberg_needs_N():
    assert index.run(['bound', '--domain', 'unit_square', '--kind', 'heisenberg']) == EXIT_INPUT_ERROR


def test_implicit_without_bounding_box(tmp_path):
    path = tmp_path / 'blob.json'
    path.write_text(json.dumps({'type': 'implicit', 'grid': [[1, 1], [1, 1]]}))
    assert index.run(['bound', '--domain', str(path), '--kind', 'dirichlet']) == EXIT_INPUT_ERROR


def test_robin_on_l_shape_is_unsupported():
    code = index.run(['eig', '--domain', 'l_shape', '--kind', 'robin', '--sigma', '1'])
    assert code == EXIT_INPUT_ERROR


def test_bad_radius_list_exits_through_argparse():
    with pytest.raises(SystemExit) as excinfo:
        index.run(['bound', '--domain', 'unit_square', '--kind', 'dirichlet', '--r', '1,-2'])
    assert excinfo.value.code == 2


# ===== Environment =====

def test_seed_resolution(monkeypatch):
    monkeypatch.delenv('EIGENBOUND_SEED', raising=False)
    assert resolve_seed(argparse.Namespace(seed=None)) == DEFAULT_SEED
    monkeypatch.setenv('EIGENBOUND_SEED', '7')
    assert resolve_seed(argparse.Namespace(seed=None)) == 7
    assert resolve_seed(argparse.Namespace(seed=5)) == 5


def test_bad_seed_env(monkeypatch):
    monkeypatch.setenv('EIGENBOUND_SEED', 'seven')
    with pytest.raises(ValidationError):
        resolve_seed(argparse.Namespace(seed=None))


def test_workers_env(monkeypatch):
    monkeypatch.setenv('EIGENBOUND_WORKERS', '3')
    assert resolve_workers(argparse.Namespace(workers=None)) == 3
    monkeypatch.setenv('EIGENBOUND_WORKERS', '0')
    with pytest.raises(ValidationError):
        resolve_workers(argparse.Namespace(workers=None))


def test_workers_do_not_change_output(tmp_path):
    argv = ['bound', '--domain', 'unit_square', '--kind', 'dirichlet', '--r', '0.6,0.8,1.0',
            '--mode', 'estimate', '--samples', '300', '--seed', '2']
    serial, pooled = tmp_path / 'serial.csv', tmp_path / 'pooled.csv'
    assert index.run(argv + ['--workers', '1', '--out', str(serial)]) == EXIT_OK
    assert index.run(argv + ['--workers', '3', '--out', str(pooled)]) == EXIT_OK
    assert serial.read_bytes() == pooled.read_bytes()
