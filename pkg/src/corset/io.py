"""Deterministic emitters: DOT / GraphML graph dumps and CSV reports.

Every artifact embeds the resolved parameter manifest as comment lines;
no timestamps or environment data, so identical inputs give identical
bytes.  CSV dialect: comma, header row, LF line endings.
"""


def manifest_lines(params, prefix="# "):
    out = []
    for key in sorted(params):
        value = params[key]
        if isinstance(value, float) and value == int(value):
            value = int(value)
        out.append(f"{prefix}{key}={value}")
    return out


def csv_report(header, rows, params):
    lines = manifest_lines(params)
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float) and cell == int(cell):
                cell = int(cell)
            cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_cayley(ball, params=None):
    """Generator-labelled undirected DOT dump of a Cayley ball."""
    group = ball.group
    lines = manifest_lines(params or {}, prefix="// ")
    lines.append("graph cayley_ball {")
    for i, g in enumerate(ball.elements):
        lines.append(f"  v{i} [label={_quote(group.format(g))}];")
    seen = set()
    for i, row in enumerate(ball.adj):
        for j, letter in row:
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            name = group.gen_names[abs(letter) - 1]
            if letter < 0:
                name = name.upper()
            lines.append(f"  v{i} -- v{j} [label={_quote(name)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dot_coned(coned, params=None):
    """DOT dump of a coned ball; cone vertices are drawn as boxes."""
    group = coned.group
    lines = manifest_lines(params or {}, prefix="// ")
    lines.append("graph coned_ball {")
    for i, g in enumerate(coned.ball.elements):
        lines.append(f"  v{i} [label={_quote(group.format(g))}];")
    for j, coset in enumerate(coned.cones):
        label = coned.cone_label(coset)
        lines.append(f"  c{j} [label={_quote(label)}, shape=box];")
    seen = set()
    for i, row in enumerate(coned.ball.adj):
        for j, letter in row:
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            name = group.gen_names[abs(letter) - 1]
            if letter < 0:
                name = name.upper()
            lines.append(f"  v{i} -- v{j} [label={_quote(name)}];")
    for j, members in enumerate(coned.cone_members):
        for i in members:
            lines.append(f"  c{j} -- v{i} [len=0.5];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dot_cusped(cusped, params=None):
    """DOT dump of a cusped ball with depth-coloured vertices."""
    group = cusped.group
    lines = manifest_lines(params or {}, prefix="// ")
    lines.append("graph cusped_ball {")
    for i in range(len(cusped.adj)):
        element, coset, level = cusped.describe(i)
        label = group.format(element) if level == 0 else f"{group.format(element)}@{level}"
        shade = min(9, 1 + level)
        lines.append(
            f"  v{i} [label={_quote(label)}, colorscheme=blues9, color={shade}];"
        )
    seen = set()
    for i, row in enumerate(cusped.adj):
        for j, _ in row:
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            lines.append(f"  v{i} -- v{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graphml_cayley(ball, params=None):
    group = ball.group
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    for line in manifest_lines(params or {}, prefix=""):
        lines.append(f"<!-- {line} -->")
    lines.append('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">')
    lines.append('  <key id="label" for="node" attr.name="label" attr.type="string"/>')
    lines.append('  <key id="gen" for="edge" attr.name="generator" attr.type="string"/>')
    lines.append('  <graph id="cayley_ball" edgedefault="undirected">')
    for i, g in enumerate(ball.elements):
        lines.append(f'    <node id="v{i}"><data key="label">{group.format(g)}</data></node>')
    seen = set()
    eid = 0
    for i, row in enumerate(ball.adj):
        for j, letter in row:
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            name = group.gen_names[abs(letter) - 1]
            if letter < 0:
                name = name.upper()
            lines.append(
                f'    <edge id="e{eid}" source="v{i}" target="v{j}">'
                f'<data key="gen">{name}</data></edge>'
            )
            eid += 1
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def distance_table_csv(ball, params=None):
    rows = [(i, ball.group.format(g), ball.dist[i]) for i, g in enumerate(ball.elements)]
    return csv_report(["vertex", "element", "distance_from_center"], rows, params or {})
