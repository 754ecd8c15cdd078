"""Prompt construction for generation and augmentation requests."""

from __future__ import annotations

from ..datastore.catalog import SchemaInfo

GENERATION_TEMPLATE = """You translate questions into a single SQLite SELECT statement.

Schema:
{schema}

Question: {question}

Answer with SQL only, inside a fenced code block."""

AUGMENT_TEMPLATE = """You write question/SQL pairs for a SQLite database.

Schema:
{schema}

Target complexity: {target} — {target_description}
{exemplars}
Produce ONE new pair, different from the examples, as:
QUESTION: <natural language question>
SQL: <one SELECT statement>

Variation index: {attempt}"""


def schema_text(schema: SchemaInfo) -> str:
    lines = []
    for t in sorted(schema.tables):
        info = schema.tables[t]
        cols = ", ".join(f"{c.name} {c.decl_type}".strip()
                         for c in info.columns)
        lines.append(f"{t}({cols})")
    return "\n".join(lines)


def build_generation_prompt(question: str, schema: str) -> str:
    return GENERATION_TEMPLATE.format(schema=schema, question=question)


def build_augment_prompt(target: str, target_description: str, schema: str,
                         exemplars: list[tuple[str, str]], attempt: int) -> str:
    if exemplars:
        shown = "\n".join(
            f"Example {i + 1}:\nQUESTION: {q}\nSQL: {s}"
            for i, (q, s) in enumerate(exemplars))
        shown = f"\n{shown}\n"
    else:
        shown = "\n"
    return AUGMENT_TEMPLATE.format(target=target,
                                   target_description=target_description,
                                   schema=schema, exemplars=shown,
                                   attempt=attempt)


def parse_pair_response(text: str) -> tuple[str, str] | None:
    """Extract (question, sql) from a QUESTION:/SQL: shaped reply."""
    question = sql = None
    lines = text.splitlines()
    for i, line in enumerate(lines):
        upper = line.strip().upper()
        if upper.startswith("QUESTION:"):
            question = line.strip()[len("QUESTION:"):].strip()
        elif upper.startswith("SQL:"):
            sql = line.strip()[len("SQL:"):].strip()
            # SQL may continue on following lines until blank or next tag.
            j = i + 1
            while j < len(lines):
                nxt = lines[j].strip()
                if not nxt or nxt.upper().startswith("QUESTION:"):
                    break
                sql += " " + nxt
                j += 1
            break
    if not question or not sql:
        return None
    return question, sql.rstrip(";").strip()
