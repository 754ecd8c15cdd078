"""Deterministic demo databases for the bundled benchmark corpus.

Two small SQLite databases are generated from a fixed seed: ``campus``
(departments, instructors, students, courses, enrollments) and ``retail``
(customers, products, orders, order items).  The generators are pure
functions of the seed so every materialized copy holds the same rows.

Design constraints the rest of the suite leans on:

* insert order is shuffled, so no column is monotone in rowid -- dropping
  an ORDER BY clause visibly changes row sequences;
* categorical columns stay under 20 distinct values, which keeps scaled
  copies testable against a total-variation-distance budget;
* a nullable FK cycle exists (department.head_id -> instructor,
  instructor.dept_id -> department) to exercise deferred backfill during
  scaling, and instructor.manager_id is a nullable self-reference;
* enrollment and order_item carry composite primary keys;
* a handful of products are never referenced by order_item so that
  anti-join queries return rows.
"""

from __future__ import annotations

import random
import sqlite3

DEMO_SEED = 0xC0FFEE

_FIRST = [
    "mia", "liam", "zara", "noah", "ivy", "owen", "ana", "eli", "nora",
    "theo", "ruth", "dana", "omar", "june", "kai", "vera", "hugo", "lena",
    "axel", "rosa",
]
_LAST = [
    "tran", "park", "chen", "ortiz", "reyes", "walsh", "patel", "kim",
    "novak", "silva", "moss", "lund", "baker", "costa", "dietz", "fox",
    "grant", "haas", "ibarra", "jones",
]

_BUILDINGS = [
    "watson hall", "painter hall", "taylor annex", "gates center",
    "olin wing", "mercer hall", "bridge lab", "keller pavilion",
    "norton house",
]
_DEPARTMENTS = [
    "physics", "chemistry", "biology", "mathematics", "history",
    "economics", "philosophy", "linguistics", "geology", "astronomy",
    "sociology", "statistics",
]
_SUBJECTS = [
    "mechanics", "algebra", "ecology", "logic", "rhetoric", "kinetics",
    "topology", "syntax", "stratigraphy", "cosmology", "demography",
    "inference", "optics", "catalysis", "genetics",
]
_TERMS = [
    "2021-fall", "2022-spring", "2022-fall", "2023-spring", "2023-fall",
    "2024-spring", "2024-fall", "2025-spring",
]

_CITIES = [
    "ashford", "brookfield", "calder", "dunmore", "eastvale", "fenwick",
    "gilroy", "harlan", "ironton", "jasper", "kenmore", "lakewood",
]
_CATEGORIES = [
    "toys", "games", "books", "kitchen", "garden", "electronics",
    "clothing", "sports",
]
_STATUSES = ["placed", "shipped", "delivered", "returned"]
_ADJECTIVES = [
    "copper", "birch", "scarlet", "coastal", "nimble", "granite", "velvet",
    "amber", "cedar", "frosted",
]
_NOUNS = [
    "kettle", "lantern", "puzzle", "racket", "trowel", "headset", "scarf",
    "atlas", "mixer", "chessboard", "compass", "beacon", "easel", "satchel",
    "whisk", "tumbler",
]

CAMPUS_ROW_COUNTS = {
    "department": 12,
    "instructor": 120,
    "student": 400,
    "course": 60,
    "enrollment": 1200,
}
RETAIL_ROW_COUNTS = {
    "customer": 150,
    "product": 80,
    "orders": 500,
    "order_item": 1500,
}

_CAMPUS_DDL = """
CREATE TABLE department (
    id INTEGER PRIMARY KEY,
    name TEXT NOT NULL UNIQUE,
    building TEXT NOT NULL,
    budget REAL NOT NULL,
    head_id INTEGER REFERENCES instructor(id)
);
CREATE TABLE instructor (
    id INTEGER PRIMARY KEY,
    name TEXT NOT NULL,
    dept_id INTEGER NOT NULL REFERENCES department(id),
    salary REAL NOT NULL,
    hire_year INTEGER NOT NULL,
    manager_id INTEGER REFERENCES instructor(id)
);
CREATE TABLE student (
    id INTEGER PRIMARY KEY,
    name TEXT NOT NULL,
    dept_id INTEGER NOT NULL REFERENCES department(id),
    year INTEGER NOT NULL,
    gpa REAL NOT NULL,
    email TEXT
);
CREATE TABLE course (
    id INTEGER PRIMARY KEY,
    title TEXT NOT NULL,
    dept_id INTEGER NOT NULL REFERENCES department(id),
    credits INTEGER NOT NULL,
    level INTEGER NOT NULL
);
CREATE TABLE enrollment (
    student_id INTEGER NOT NULL REFERENCES student(id),
    course_id INTEGER NOT NULL REFERENCES course(id),
    term TEXT NOT NULL,
    grade REAL,
    PRIMARY KEY (student_id, course_id, term)
);
"""

_RETAIL_DDL = """
CREATE TABLE customer (
    id INTEGER PRIMARY KEY,
    name TEXT NOT NULL,
    city TEXT NOT NULL,
    vip INTEGER NOT NULL,
    signup_year INTEGER NOT NULL
);
CREATE TABLE product (
    id INTEGER PRIMARY KEY,
    name TEXT NOT NULL,
    category TEXT NOT NULL,
    price REAL NOT NULL
);
CREATE TABLE orders (
    id INTEGER PRIMARY KEY,
    customer_id INTEGER NOT NULL REFERENCES customer(id),
    status TEXT NOT NULL,
    placed_day INTEGER NOT NULL
);
CREATE TABLE order_item (
    order_id INTEGER NOT NULL REFERENCES orders(id),
    product_id INTEGER NOT NULL REFERENCES product(id),
    qty INTEGER NOT NULL,
    unit_price REAL NOT NULL,
    PRIMARY KEY (order_id, product_id)
);
"""


def _person_name(rng: random.Random) -> str:
    return f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"


def _insert_shuffled(conn: sqlite3.Connection, table: str, columns: list[str],
                     rows: list[tuple], rng: random.Random) -> None:
    rows = list(rows)
    rng.shuffle(rows)
    placeholders = ", ".join("?" for _ in columns)
    conn.executemany(
        f"INSERT INTO {table} ({', '.join(columns)}) VALUES ({placeholders})",
        rows,
    )


def build_campus_db(path: str, seed: int = DEMO_SEED) -> None:
    """Create the campus database file at *path* (overwrites)."""
    rng = random.Random(seed)
    conn = sqlite3.connect(path)
    try:
        conn.executescript(_CAMPUS_DDL)

        dept_ids = list(range(1, CAMPUS_ROW_COUNTS["department"] + 1))
        departments = [
            (i, _DEPARTMENTS[i - 1], rng.choice(_BUILDINGS),
             float(rng.randrange(150_000, 960_000, 10_000)), None)
            for i in dept_ids
        ]

        inst_ids = list(range(1, CAMPUS_ROW_COUNTS["instructor"] + 1))
        instructors = []
        for i in inst_ids:
            manager = None
            if rng.random() > 0.30:
                manager = rng.choice([x for x in inst_ids if x != i])
            instructors.append((
                i, _person_name(rng), rng.choice(dept_ids),
                round(rng.uniform(52_000, 145_000), 2),
                rng.randrange(2008, 2023), manager,
            ))

        # Backfill the nullable side of the department<->instructor cycle.
        departments = [
            (d[0], d[1], d[2], d[3],
             rng.choice(inst_ids) if rng.random() > 0.25 else None)
            for d in departments
        ]

        student_ids = list(range(1, CAMPUS_ROW_COUNTS["student"] + 1))
        students = []
        for i in student_ids:
            name = _person_name(rng)
            email = None
            if rng.random() > 0.20:
                email = f"{name.replace(' ', '.')}.{i}@campus.edu"
            students.append((
                i, name, rng.choice(dept_ids), rng.randrange(1, 5),
                round(rng.uniform(2.0, 4.0), 2), email,
            ))

        course_ids = list(range(1, CAMPUS_ROW_COUNTS["course"] + 1))
        flavors = ["introductory", "intermediate", "advanced", "seminar:"]
        courses = [
            (i, f"{flavors[(i - 1) % 4]} {_SUBJECTS[(i - 1) % len(_SUBJECTS)]}",
             rng.choice(dept_ids), rng.choice([2, 3, 4]),
             rng.choice([100, 200, 300, 400]))
            for i in course_ids
        ]

        seen: set[tuple] = set()
        enrollments = []
        grade_steps = [round(2.0 + 0.25 * k, 2) for k in range(9)]  # 2.0 .. 4.0
        while len(enrollments) < CAMPUS_ROW_COUNTS["enrollment"]:
            key = (rng.choice(student_ids), rng.choice(course_ids),
                   rng.choice(_TERMS))
            if key in seen:
                continue
            seen.add(key)
            grade = rng.choice(grade_steps) if rng.random() > 0.15 else None
            enrollments.append(key + (grade,))

        _insert_shuffled(conn, "department",
                         ["id", "name", "building", "budget", "head_id"],
                         departments, rng)
        _insert_shuffled(conn, "instructor",
                         ["id", "name", "dept_id", "salary", "hire_year",
                          "manager_id"], instructors, rng)
        _insert_shuffled(conn, "student",
                         ["id", "name", "dept_id", "year", "gpa", "email"],
                         students, rng)
        _insert_shuffled(conn, "course",
                         ["id", "title", "dept_id", "credits", "level"],
                         courses, rng)
        _insert_shuffled(conn, "enrollment",
                         ["student_id", "course_id", "term", "grade"],
                         enrollments, rng)
        conn.commit()
    finally:
        conn.close()


def build_retail_db(path: str, seed: int = DEMO_SEED + 1) -> None:
    """Create the retail database file at *path* (overwrites)."""
    rng = random.Random(seed)
    conn = sqlite3.connect(path)
    try:
        conn.executescript(_RETAIL_DDL)

        cust_ids = list(range(1, RETAIL_ROW_COUNTS["customer"] + 1))
        customers = [
            (i, _person_name(rng), rng.choice(_CITIES),
             1 if rng.random() < 0.12 else 0, rng.randrange(2019, 2025))
            for i in cust_ids
        ]

        prod_ids = list(range(1, RETAIL_ROW_COUNTS["product"] + 1))
        products = [
            (i, f"{_ADJECTIVES[(i - 1) % len(_ADJECTIVES)]} "
                f"{_NOUNS[(i - 1) // len(_ADJECTIVES) % len(_NOUNS)]} {i}",
             rng.choice(_CATEGORIES), round(rng.uniform(4.0, 300.0), 2))
            for i in prod_ids
        ]
        price_of = {p[0]: p[3] for p in products}

        order_ids = list(range(1, RETAIL_ROW_COUNTS["orders"] + 1))
        status_weights = [0.25, 0.35, 0.30, 0.10]
        orders = [
            (i, rng.choice(cust_ids),
             rng.choices(_STATUSES, weights=status_weights)[0],
             rng.randrange(1, 721))
            for i in order_ids
        ]

        # Leave the last eight products unsold so anti-joins return rows.
        sellable = prod_ids[:-8]
        seen: set[tuple] = set()
        items = []
        while len(items) < RETAIL_ROW_COUNTS["order_item"]:
            key = (rng.choice(order_ids), rng.choice(sellable))
            if key in seen:
                continue
            seen.add(key)
            items.append(key + (rng.randrange(1, 7), price_of[key[1]]))

        _insert_shuffled(conn, "customer",
                         ["id", "name", "city", "vip", "signup_year"],
                         customers, rng)
        _insert_shuffled(conn, "product",
                         ["id", "name", "category", "price"], products, rng)
        _insert_shuffled(conn, "orders",
                         ["id", "customer_id", "status", "placed_day"],
                         orders, rng)
        _insert_shuffled(conn, "order_item",
                         ["order_id", "product_id", "qty", "unit_price"],
                         items, rng)
        conn.commit()
    finally:
        conn.close()
