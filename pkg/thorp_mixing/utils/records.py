"""
Flatten result documents into records and render them as CSV.

A document is a dict with a list of row dicts under "records" and any
number of scalar or nested metadata fields. CSV output writes the
flattened metadata as "# key: value" comment lines, then a header row
and one row per record.
"""
import csv
import io

from thorp_mixing.exceptions import DomainError


def flatten_dict(d, parent_key="", sep="."):
    """
    Recursively flatten a nested dict into a single-level dict.

    Keys are concatenated with the provided separator. Non-dict inputs
    yield an empty dict.
    """
    out = {}
    for k, v in (d or {}).items() if isinstance(d, dict) else []:
        nk = f"{parent_key}{sep}{k}" if parent_key else k
        if isinstance(v, dict):
            out.update(flatten_dict(v, nk, sep))
        else:
            out[nk] = v
    return out


def to_records(data):
    """
    One flat dict per record; non-dict items become {"value": item}.

    Raises:
        DomainError: If data is not a list.
    """
    if not isinstance(data, list):
        raise DomainError(f"Records must be a list, got {type(data).__name__}.")
    return [(flatten_dict(x) if isinstance(x, dict) else {"value": x}) for x in data]


def format_cell(value):
    """CSV text for one value; floats carry 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return " ".join(format_cell(v) for v in value)
    return str(value)


def _header(rows):
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def document_to_csv(document, records_key="records"):
    """
    Render a document as CSV text with LF line endings.

    Args:
        document (dict): Metadata plus a list under records_key.
        records_key (str): Field holding the per-row records.

    Returns:
        str: Comment lines, header row, data rows.
    """
    meta = flatten_dict({k: v for k, v in document.items() if k != records_key})
    rows = to_records(document.get(records_key, []))
    buffer = io.StringIO()
    for key in sorted(meta):
        buffer.write(f"# {key}: {format_cell(meta[key])}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    columns = _header(rows)
    if columns:
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(column)) for column in columns])
    return buffer.getvalue()
