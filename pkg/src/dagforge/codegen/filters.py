"""Custom template filters for platform-specific formatting.

All output obeys a 79-column budget so that rendered scripts come out clean
under the style analyzer; anything that would overflow wraps deterministically.
"""

from __future__ import annotations

MAX_LINE = 79


def format_command_list(command, indent: int = 8, keyword: str = "command=") -> str:
    """Render a command array as a Python list literal, wrapping if long."""
    items = [repr(part) for part in command]
    inline = "[" + ", ".join(items) + "]"
    if indent + len(keyword) + len(inline) + 1 <= MAX_LINE:
        return inline
    open_col = indent + len(keyword) + 1
    pad = " " * open_col
    lines = [f"[{items[0]},"]
    lines += [f"{pad}{item}," for item in items[1:-1]]
    lines.append(f"{pad}{items[-1]}]")
    return "\n".join(lines)


def format_environment_dict(entries, indent: int = 8) -> str:
    """Render environment entries as a dict literal.

    Entries are ("env", NAME, default) for host-environment lookups with the
    parameter default as fallback, or ("lit", NAME, value) for fixed values.
    """
    if not entries:
        return "{}"
    entry_pad = " " * (indent + 4)
    inner_pad = entry_pad + "    "
    lines = ["{"]
    for entry in entries:
        kind, name = entry[0], entry[1]
        if kind == "env":
            default = entry[2]
            one_line = f"{entry_pad}{name!r}: os.getenv({name!r}, {default!r}),"
            two_line = f"{inner_pad}{name!r}, {default!r}),"
            if len(one_line) <= MAX_LINE:
                lines.append(one_line)
            elif len(two_line) <= MAX_LINE or not isinstance(default, str):
                lines.append(f"{entry_pad}{name!r}: os.getenv(")
                lines.append(two_line)
            else:
                # Long string default: adjacent literals, chunked raw.
                lines.append(f"{entry_pad}{name!r}: os.getenv(")
                lines.append(f"{inner_pad}{name!r},")
                budget = max(8, MAX_LINE - len(inner_pad) - 6)
                chunks = [
                    default[i:i + budget] for i in range(0, len(default), budget)
                ]
                for chunk in chunks[:-1]:
                    lines.append(f"{inner_pad}{chunk!r}")
                lines.append(f"{inner_pad}{chunks[-1]!r}),")
        else:
            lines.append(f"{entry_pad}{name!r}: {entry[2]!r},")
    lines.append(" " * indent + "}")
    return "\n".join(lines)


def format_dependency_chains(chains, indent: int = 4) -> str:
    """Render dependency chains as shift statements.

    A chain that fits on one line renders as ``a >> b >> c``; longer chains
    fall back to one ``a >> b`` statement per hop.
    """
    pad = " " * indent
    lines: list[str] = []
    for chain in chains:
        inline = " >> ".join(chain)
        if indent + len(inline) <= MAX_LINE:
            lines.append(pad + inline)
            continue
        for upstream, downstream in zip(chain, chain[1:]):
            pair = f"{upstream} >> {downstream}"
            if indent + len(pair) <= MAX_LINE:
                lines.append(pad + pair)
            else:
                lines.append(f"{pad}({upstream} >>")
                lines.append(f"{pad} {downstream})")
    return "\n".join(lines)


def pyrepr(value) -> str:
    return repr(value)


def wrapped_str_arg(value: str, indent: int = 8, keyword: str = "") -> str:
    """Single-quoted string argument, split into adjacent literals when long."""
    literal = repr(value)
    if indent + len(keyword) + len(literal) + 1 <= MAX_LINE:
        return literal
    budget = MAX_LINE - indent - 8
    words = value.split(" ")
    pieces: list[str] = []
    current = ""
    for word in words:
        candidate = word if not current else current + " " + word
        if len(repr(candidate + " ")) > budget and current:
            pieces.append(current + " ")
            current = word
        else:
            current = candidate
    if current:
        pieces.append(current)
    pad = " " * (indent + 4)
    body = "\n".join(f"{pad}{piece!r}" for piece in pieces)
    return f"(\n{body}\n{' ' * indent})"


FILTERS = {
    "format_command_list": format_command_list,
    "format_environment_dict": format_environment_dict,
    "format_dependency_chains": format_dependency_chains,
    "pyrepr": pyrepr,
    "wrapped_str_arg": wrapped_str_arg,
}
