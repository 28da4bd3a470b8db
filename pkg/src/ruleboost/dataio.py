"""Dataset ingestion: an ARFF subset and simple CSV, plus an ARFF writer.

The ARFF reader supports @relation, numeric and nominal @attribute
declarations, dense and sparse @data rows, quoted values and '?' missing
markers.  Label attributes are the trailing ones (or an explicit list of
names); they must be nominal with domain {0, 1} and are mapped to -1/+1.

Sparse rows follow ARFF semantics: unspecified numeric entries are 0 and
unspecified nominal entries are the first value of their domain.
"""

from __future__ import annotations

import csv

import numpy as np

from .dataset import NOMINAL, NUMERIC, Attribute, AttributeSchema, Dataset
from .errors import ParseError, SchemaError

_NUMERIC_TYPES = {"numeric", "real", "integer"}


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in ("'", '"'):
        return token[1:-1]
    return token


def _split_csv_like(text: str, line: int) -> list[str]:
    """Split on commas that are outside single or double quotes."""
    parts = []
    current = []
    quote = None
    for char in text:
        if quote:
            current.append(char)
            if char == quote:
                quote = None
        elif char in ("'", '"'):
            current.append(char)
            quote = char
        elif char == ",":
            parts.append("".join(current))
            current = []
        else:
            current.append(char)
    if quote:
        raise ParseError("unterminated quote", line=line)
    parts.append("".join(current))
    return parts


def _parse_attribute(rest: str, line: int) -> Attribute:
    rest = rest.strip()
    if not rest:
        raise ParseError("@attribute needs a name and a type", line=line)
    if rest[0] in ("'", '"'):
        quote = rest[0]
        end = rest.find(quote, 1)
        if end < 0:
            raise ParseError("unterminated attribute name", line=line)
        name = rest[1:end]
        type_part = rest[end + 1 :].strip()
    else:
        pieces = rest.split(None, 1)
        if len(pieces) != 2:
            raise ParseError("@attribute needs a name and a type", line=line)
        name, type_part = pieces[0], pieces[1].strip()
    if not type_part:
        raise ParseError(f"attribute {name!r} has no type", line=line)
    if type_part.startswith("{"):
        if not type_part.endswith("}"):
            raise ParseError(f"attribute {name!r} has an unterminated value set", line=line)
        values = [_unquote(v) for v in _split_csv_like(type_part[1:-1], line)]
        if not values or any(v == "" for v in values):
            raise ParseError(f"attribute {name!r} has an empty nominal value", line=line)
        return Attribute(name, NOMINAL, tuple(values))
    if type_part.lower() in _NUMERIC_TYPES:
        return Attribute(name, NUMERIC)
    raise ParseError(
        f"attribute {name!r} has unsupported type {type_part!r} "
        "(only numeric and nominal attributes are supported)",
        line=line,
    )


def _parse_value(attr: Attribute, token: str, line: int):
    token = _unquote(token)
    if token == "?":
        return None
    if attr.is_numeric:
        try:
            return float(token)
        except ValueError:
            raise ParseError(
                f"expected a number for attribute {attr.name!r}, got {token!r}", line=line
            ) from None
    if token not in attr.values:
        raise SchemaError(
            f"line {line}: value {token!r} is not in the domain of attribute {attr.name!r}"
        )
    return token


def _sparse_defaults(attributes) -> list:
    return [0.0 if a.is_numeric else a.values[0] for a in attributes]


def _parse_sparse_row(text: str, attributes, line: int) -> list:
    body = text.strip()[1:-1].strip()
    row = _sparse_defaults(attributes)
    if not body:
        return row
    for chunk in _split_csv_like(body, line):
        chunk = chunk.strip()
        if not chunk:
            raise ParseError("empty entry in sparse row", line=line)
        pieces = chunk.split(None, 1)
        if len(pieces) != 2:
            raise ParseError(f"sparse entry {chunk!r} needs an index and a value", line=line)
        try:
            index = int(pieces[0])
        except ValueError:
            raise ParseError(f"invalid sparse index {pieces[0]!r}", line=line) from None
        if not 0 <= index < len(attributes):
            raise ParseError(f"sparse index {index} out of range", line=line)
        row[index] = _parse_value(attributes[index], pieces[1], line)
    return row


def _read_arff(path):
    attributes: list[Attribute] = []
    rows = []
    in_data = False
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("%"):
                continue
            if not in_data:
                lowered = stripped.lower()
                if lowered.startswith("@relation"):
                    continue
                if lowered.startswith("@attribute"):
                    attributes.append(_parse_attribute(stripped[len("@attribute") :], line_number))
                    continue
                if lowered.startswith("@data"):
                    if not attributes:
                        raise ParseError("@data before any @attribute", line=line_number)
                    in_data = True
                    continue
                raise ParseError(f"unexpected header line {stripped!r}", line=line_number)
            if stripped.startswith("{"):
                if not stripped.endswith("}"):
                    raise ParseError("unterminated sparse row", line=line_number)
                rows.append(_parse_sparse_row(stripped, attributes, line_number))
            else:
                tokens = _split_csv_like(stripped, line_number)
                if len(tokens) != len(attributes):
                    raise ParseError(
                        f"row has {len(tokens)} values, expected {len(attributes)}",
                        line=line_number,
                    )
                rows.append(
                    [
                        _parse_value(attr, token, line_number)
                        for attr, token in zip(attributes, tokens)
                    ]
                )
    if not in_data:
        raise ParseError(f"{path}: no @data section found")
    return attributes, rows


def _label_indices(attributes, labels) -> list[int]:
    names = [a.name for a in attributes]
    if isinstance(labels, int):
        if not 0 < labels < len(attributes):
            raise SchemaError(
                f"label count {labels} does not leave any feature among "
                f"{len(attributes)} attributes"
            )
        return list(range(len(attributes) - labels, len(attributes)))
    indices = []
    for label in labels:
        if label not in names:
            raise SchemaError(f"no attribute named {label!r} to use as a label")
        indices.append(names.index(label))
    if not indices:
        raise SchemaError("no label attributes given")
    return indices


def _to_sign(attr: Attribute, value, row_number: int) -> int:
    if value is None:
        raise SchemaError(f"example {row_number}: missing label value for {attr.name!r}")
    if value == "1":
        return 1
    if value == "0":
        return -1
    raise SchemaError(
        f"example {row_number}: label {attr.name!r} has value {value!r}, expected 0 or 1"
    )


def _assemble(attributes, rows, labels) -> Dataset:
    label_idx = _label_indices(attributes, labels)
    label_set = set(label_idx)
    for i in label_idx:
        attr = attributes[i]
        if attr.is_numeric or set(attr.values) != {"0", "1"}:
            raise SchemaError(
                f"label attribute {attr.name!r} must be nominal with domain {{0, 1}}"
            )
    feature_idx = [i for i in range(len(attributes)) if i not in label_set]
    schema = AttributeSchema(tuple(attributes[i] for i in feature_idx))
    label_names = [attributes[i].name for i in label_idx]
    feature_rows = [[row[i] for i in feature_idx] for row in rows]
    label_matrix = np.array(
        [
            [_to_sign(attributes[i], row[i], r) for i in label_idx]
            for r, row in enumerate(rows)
        ],
        dtype=np.int8,
    ).reshape(len(rows), len(label_idx))
    return Dataset.from_rows(schema, feature_rows, label_matrix, label_names)


def load_arff(path, labels) -> Dataset:
    """Load an ARFF file; ``labels`` is a trailing count or a name list."""
    attributes, rows = _read_arff(path)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return _assemble(attributes, rows, labels)


def _needs_quoting(value: str) -> bool:
    return any(c in value for c in (" ", ",", "%", "{", "}", '"', "\t")) or value == "?"


def _format_nominal(value: str) -> str:
    if "'" in value:
        raise SchemaError(f"nominal value {value!r} contains a quote; cannot write ARFF")
    return f"'{value}'" if _needs_quoting(value) else value


def save_arff(dataset: Dataset, path, relation: str = "ruleboost") -> None:
    """Write a dense ARFF file whose reload reproduces the dataset exactly."""
    lines = [f"@relation {relation}", ""]
    for attr in dataset.schema.attributes:
        if attr.is_numeric:
            lines.append(f"@attribute {_format_nominal(attr.name)} numeric")
        else:
            values = ",".join(_format_nominal(v) for v in attr.values)
            lines.append(f"@attribute {_format_nominal(attr.name)} {{{values}}}")
    for name in dataset.label_names:
        lines.append(f"@attribute {_format_nominal(name)} {{0,1}}")
    lines.append("")
    lines.append("@data")
    for i in range(dataset.n_examples):
        cells = []
        for value in dataset.example(i).values:
            if value is None:
                cells.append("?")
            elif isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(_format_nominal(value))
        cells.extend("1" if v == 1 else "0" for v in dataset.labels[i])
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines))
        handle.write("\n")


def _is_missing(token: str) -> bool:
    return token.strip() in ("", "?")


def load_csv(path, labels) -> Dataset:
    """Load a CSV file with a header row.

    Column types are inferred from the first non-missing entry: numeric if
    it parses as a float, nominal otherwise (values in first-seen order).
    ``labels`` is a list of column names or a trailing-count integer.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file; a header row is required") from None
        header = [h.strip() for h in header]
        raw_rows = []
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"row has {len(row)} values, expected {len(header)}", line=line_number
                )
            raw_rows.append((line_number, [c.strip() for c in row]))
    if not raw_rows:
        raise ParseError(f"{path}: no data rows")

    if isinstance(labels, int):
        if not 0 < labels < len(header):
            raise SchemaError(f"label count {labels} invalid for {len(header)} columns")
        label_names = header[-labels:]
    else:
        label_names = list(labels)
    label_set = set(label_names)
    missing_labels = label_set - set(header)
    if missing_labels:
        raise SchemaError(f"label columns not found in header: {sorted(missing_labels)}")

    attributes = []
    columns_raw: list[list] = []
    for j, name in enumerate(header):
        if name in label_set:
            continue
        tokens = [(line, row[j]) for line, row in raw_rows]
        first = next((t for _, t in tokens if not _is_missing(t)), None)
        numeric = False
        if first is not None:
            try:
                float(first)
                numeric = True
            except ValueError:
                numeric = False
        if numeric:
            column = []
            for line, token in tokens:
                if _is_missing(token):
                    column.append(None)
                else:
                    try:
                        column.append(float(token))
                    except ValueError:
                        raise ParseError(
                            f"column {name!r} is numeric but got {token!r}", line=line
                        ) from None
            attributes.append(Attribute(name, NUMERIC))
        else:
            values: list[str] = []
            column = []
            for _, token in tokens:
                if _is_missing(token):
                    column.append(None)
                else:
                    if token not in values:
                        values.append(token)
                    column.append(token)
            if not values:
                raise SchemaError(f"column {name!r} has no values at all")
            attributes.append(Attribute(name, NOMINAL, tuple(values)))
        columns_raw.append(column)

    schema = AttributeSchema(tuple(attributes))
    n = len(raw_rows)
    feature_rows = [[columns_raw[j][i] for j in range(len(attributes))] for i in range(n)]

    label_matrix = np.empty((n, len(label_names)), dtype=np.int8)
    for k, name in enumerate(label_names):
        j = header.index(name)
        for i, (line, row) in enumerate(raw_rows):
            token = row[j]
            if token == "1":
                label_matrix[i, k] = 1
            elif token == "0":
                label_matrix[i, k] = -1
            else:
                raise SchemaError(
                    f"line {line}: label {name!r} has value {token!r}, expected 0 or 1"
                )
    return Dataset.from_rows(schema, feature_rows, label_matrix, label_names)
