"""Domain-spec loading, report rows and their CSV/JSON export."""
import json

import numpy as np
import pytest

from utils import reports
from utils.bounds import BoundReport
from utils.constants import REPORT_FORMAT_VERSION
from utils.eigensolver import EigenResult
from utils.geometry import BallDomain, BoxUnionDomain, ImplicitDomain, PolygonDomain
from utils.storage import build_domain, load_domain_spec, resolve_domain_path, write_report
from utils.validation import ValidationError


# ===== Domain Specs =====

@pytest.mark.parametrize('name, cls, dim', [
    ('unit_square', BoxUnionDomain, 2),
    ('rect_2x1', BoxUnionDomain, 2),
    ('l_shape', BoxUnionDomain, 2),
    ('unit_disk', BallDomain, 2),
    ('annulus', PolygonDomain, 2),
    ('heisenberg_cube', BoxUnionDomain, 3),
])
def test_shipped_specs_load(name, cls, dim):
    spec = load_domain_spec(name)
    assert isinstance(spec.domain, cls)
    assert spec.domain.dim == dim


def test_shipped_spec_metadata():
    square = load_domain_spec('unit_square')
    assert square.convex
    assert square.N is None
    cube = load_domain_spec('heisenberg_cube')
    assert cube.N == 1
    assert cube.heisenberg.N == 1


def test_heisenberg_property_needs_N():
    with pytest.raises(ValidationError):
        load_domain_spec('unit_square').heisenberg


def test_load_from_path(tmp_path):
    path = tmp_path / 'strip.json'
    path.write_text(json.dumps({'type': 'box_union', 'boxes': [{'lo': [0, 0], 'hi': [3, 1]}]}))
    spec = load_domain_spec(path)
    assert spec.name == 'strip'
    assert not spec.convex
    assert spec.domain.contains(np.array([[2.5, 0.5]]))[0]


def test_missing_spec():
    with pytest.raises(FileNotFoundError):
        resolve_domain_path('no_such_domain.json')


def test_invalid_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"type": "ball", ')
    with pytest.raises(ValidationError):
        load_domain_spec(path)


def test_invalid_N(tmp_path):
    path = tmp_path / 'square.json'
    path.write_text(json.dumps({'type': 'box_union', 'boxes': [{'lo': [0, 0], 'hi': [1, 1]}],
                                'N': 1}))
    # A planar domain cannot be read as a subset of H^1
    with pytest.raises(ValidationError):
        load_domain_spec(path)


@pytest.mark.parametrize('document', [
    {'type': 'torus'},
    {'vertices': [[0, 0], [1, 0], [0, 1]]},
    {'type': 'polygon2d'},
    {'type': 'box_union', 'boxes': []},
    {'type': 'box_union', 'boxes': [{'lo': [0, 0]}]},
    {'type': 'ball', 'center': [0, 0]},
    {'type': 'implicit', 'grid': [[1, 1], [1, 1]]},
    {'type': 'implicit', 'grid': [1, 1], 'bounding_box': {'lo': [0, 0], 'hi': [1, 1]}},
])
def test_build_domain_errors(document):
    with pytest.raises(ValidationError):
        build_domain(document)


def test_build_domain_not_an_object():
    with pytest.raises(ValidationError):
        build_domain([1, 2, 3])


def test_occupancy_grid_domain():
    domain = build_domain({
        'type': 'implicit',
        'grid': [[1, 1], [1, 0]],
        'bounding_box': {'lo': [0, 0], 'hi': [2, 2]},
    })
    assert isinstance(domain, ImplicitDomain)
    assert not domain.exact
    inside = domain.contains(np.array([[0.5, 0.5], [0.5, 1.5], [1.5, 0.5], [1.5, 1.5]]))
    assert inside.tolist() == [True, True, True, False]


# ===== Report Output =====

def test_write_report_to_file(tmp_path):
    path = tmp_path / 'nested' / 'report.csv'
    write_report('a,b\n1,2\n', path)
    assert path.read_text() == 'a,b\n1,2\n'


def test_write_report_to_stdout(capsys):
    write_report('hello\n', None)
    assert capsys.readouterr().out == 'hello\n'


# ===== Report Rows =====

def _report(value=2.0, valid=True):
    return BoundReport('lieb', value, valid, inputs={'r': 1.0, 'psi': 0.25})


def test_bound_row_passes_below_reference():
    row = reports.bound_row(_report(2.0), 'unit_square', 'dirichlet', reference=19.74, margin=1.02)
    assert row['passed'] is True
    assert row['ratio'] == pytest.approx(2.0 / 19.74)
    assert row['r'] == 1.0


def test_bound_row_fails_above_reference():
    row = reports.bound_row(_report(25.0), 'unit_square', 'dirichlet', reference=19.74, margin=1.02)
    assert row['passed'] is False
    assert reports.failed_rows([row]) == [row]


def test_uncertified_bound_never_fails():
    row = reports.bound_row(_report(25.0, valid=False), 'unit_square', 'dirichlet',
                            reference=19.74, margin=1.02)
    assert row['passed'] is True


def test_bound_row_without_reference():
    row = reports.bound_row(_report(), 'unit_square', 'dirichlet')
    assert row['passed'] is None
    assert row['ratio'] is None
    assert json.loads(row['inputs']) == {'r': 1.0, 'psi': 0.25}


def test_eigen_row_prefers_extrapolated():
    result = EigenResult(value=19.72, residual=1e-9, h=1 / 32, iterations=12, extrapolated=19.739)
    row = reports.eigen_row(result, 'unit_square', 'dirichlet', reference=2 * np.pi ** 2)
    assert row['value'] == 19.739
    assert row['ratio'] == pytest.approx(19.739 / (2 * np.pi ** 2))
    assert json.loads(row['inputs'])['extrapolated'] == 19.739


def test_summary_row_inputs_handle_infinity():
    row = reports.summary_row('oracle', 'distribution_inequality', 0.1, True,
                              inputs={'slack': float('inf'), 'count': np.int64(3)})
    assert json.loads(row['inputs']) == {'slack': 'inf', 'count': 3}


# ===== Export =====

def _rows():
    return [
        reports.bound_row(_report(2.0), 'unit_square', 'dirichlet', reference=19.74, margin=1.02),
        reports.summary_row('validate', 'checks', 1.0, True),
    ]


def test_csv_export_header():
    text = reports.export(_rows(), 'validate seed=1', 'csv')
    lines = text.splitlines()
    assert lines[0] == f'# {REPORT_FORMAT_VERSION}'
    assert lines[1] == '# validate seed=1'
    assert lines[2] == '# columns: ' + ','.join(reports.REPORT_COLUMNS)
    assert lines[3] == ','.join(reports.REPORT_COLUMNS)
    assert len(lines) == 6


def test_json_export():
    document = json.loads(reports.export(_rows(), 'validate seed=1', 'json'))
    assert document['format'] == REPORT_FORMAT_VERSION
    assert document['columns'] == reports.REPORT_COLUMNS
    assert document['rows'][0]['name'] == 'lieb'
    assert document['rows'][1]['passed'] is True


def test_export_is_deterministic():
    assert reports.export(_rows(), 't', 'csv') == reports.export(_rows(), 't', 'csv')
    assert reports.export(_rows(), 't', 'json') == reports.export(_rows(), 't', 'json')


def test_export_rejects_unknown_format():
    with pytest.raises(ValidationError):
        reports.export(_rows(), 't', 'xml')
