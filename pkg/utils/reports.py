"""Report tables: rows for bounds, eigenvalues and checks, exported as CSV or JSON.

Reports carry no timestamps, so the same configuration and seed always
produce byte-identical files.
"""
import io
import json
import logging
import math

import numpy as np
import pandas as pd

from utils.bounds import BoundReport
from utils.constants import REPORT_FORMAT_VERSION, VALID_FORMATS
from utils.eigensolver import EigenResult
from utils.validation import ValidationError

logger = logging.getLogger(__name__)

# Fixed column order of every report
REPORT_COLUMNS = [
    'section', 'domain', 'kind', 'name', 'value', 'valid', 'degenerate',
    'reference', 'ratio', 'passed', 'r', 'inputs', 'notes',
]

FLOAT_FORMAT = '%.12g'


def _clean(value):
    """Plain Python scalars; non-finite floats become strings."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def _json_inputs(inputs: dict) -> str:
    return json.dumps({k: _clean(v) for k, v in inputs.items()}, separators=(',', ':'))


def bound_row(report: BoundReport, domain: str, kind: str, section: str = 'bound',
              reference: float | None = None, margin: float | None = None) -> dict:
    """One row for a bound, optionally checked against a reference eigenvalue."""
    row = {
        'section': section,
        'domain': domain,
        'kind': kind,
        'name': report.bound_id,
        'value': report.value,
        'valid': report.valid,
        'degenerate': report.degenerate,
        'reference': reference,
        'ratio': None,
        'passed': None,
        'r': report.inputs.get('r'),
        'inputs': _json_inputs(report.inputs),
        'notes': '; '.join(report.notes),
    }
    if reference is not None:
        row['ratio'] = report.value / reference if reference > 0 else None
        if margin is not None:
            # Only certified bounds are held to the inequality
            row['passed'] = (not report.valid) or report.value <= reference * margin
    return row


def eigen_row(result: EigenResult, domain: str, kind: str, reference: float | None = None) -> dict:
    inputs = {'h': result.h, 'iterations': result.iterations, 'residual': result.residual}
    if result.extrapolated is not None:
        inputs['extrapolated'] = result.extrapolated
    best = result.extrapolated if result.extrapolated is not None else result.value
    return {
        'section': 'eigen',
        'domain': domain,
        'kind': kind,
        'name': result.kind,
        'value': best,
        'valid': None,
        'degenerate': None,
        'reference': reference,
        'ratio': best / reference if reference else None,
        'passed': None,
        'r': None,
        'inputs': _json_inputs(inputs),
        'notes': '',
    }


def summary_row(section: str, name: str, value: float, passed: bool | None = None,
                domain: str = '', kind: str = '', inputs: dict | None = None, notes: str = '') -> dict:
    return {
        'section': section, 'domain': domain, 'kind': kind, 'name': name, 'value': value,
        'valid': None, 'degenerate': None, 'reference': None, 'ratio': None, 'passed': passed,
        'r': None, 'inputs': _json_inputs(inputs or {}), 'notes': notes,
    }


def rows_to_frame(rows: list[dict]) -> pd.DataFrame:
    """DataFrame with the fixed report column order."""
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def export_to_csv(rows: list[dict], title: str) -> str:
    """CSV with '#' header lines naming the format version and the columns."""
    output = io.StringIO()
    output.write(f'# {REPORT_FORMAT_VERSION}\n')
    output.write(f'# {title}\n')
    output.write(f'# columns: {",".join(REPORT_COLUMNS)}\n')
    output.write(rows_to_frame(rows).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n'))
    return output.getvalue()


def export_to_json(rows: list[dict], title: str) -> str:
    document = {
        'format': REPORT_FORMAT_VERSION,
        'title': title,
        'columns': REPORT_COLUMNS,
        'rows': [{col: _clean(row.get(col)) for col in REPORT_COLUMNS} for row in rows],
    }
    return json.dumps(document, indent=2, allow_nan=False, default=str) + '\n'


def export(rows: list[dict], title: str, fmt: str) -> str:
    if fmt not in VALID_FORMATS:
        raise ValidationError(f'format must be one of {", ".join(VALID_FORMATS)}')
    logger.debug(f'Exporting {len(rows)} report rows as {fmt}')
    return export_to_csv(rows, title) if fmt == 'csv' else export_to_json(rows, title)


def failed_rows(rows: list[dict]) -> list[dict]:
    """Rows whose check did not pass."""
    return [row for row in rows if row.get('passed') is False]
