"""Known-good question/SQL templates per taxonomy subcategory.

The template mock uses this bank to answer augmentation prompts with
valid pairs against the bundled demo databases.  Each entry is a
function of a variation index ``k`` — varying a literal, a threshold, or
a projected column — so consecutive draws produce structurally identical
but fingerprint-distinct queries.

The 4.4 entry is intentionally present even though quantified
comparisons do not execute on sqlite: candidate validation rejects it at
the execution step, which is the honest behavior for an engine that
cannot run the construct.
"""

from __future__ import annotations

_TABLES = ("department", "course", "student", "instructor")
_LETTERS = "abcdefghij"


def _t_1_1(k):
    t = _TABLES[k % len(_TABLES)]
    return f"Show every row of {t}.", f"SELECT * FROM {t}"


def _t_1_2(k):
    picks = [("name", "department"), ("title", "course"), ("name", "student"),
             ("name", "instructor"), ("email", "student"),
             ("building", "department")]
    col, t = picks[k % len(picks)]
    return f"List the {col} of every {t}.", f"SELECT {col} FROM {t}"


def _t_1_3(k):
    cut = round(2.5 + 0.1 * (k % 12), 1)
    return (f"Which students have a GPA above {cut}?",
            f"SELECT name FROM student WHERE gpa > {cut}")


def _t_1_4(k):
    yr = 1 + k % 4
    cut = round(2.4 + 0.1 * (k % 10), 1)
    return (f"Which year-{yr} students have a GPA above {cut}?",
            f"SELECT name FROM student WHERE year = {yr} AND gpa > {cut}")


def _t_1_5(k):
    letter = _LETTERS[k % len(_LETTERS)]
    return (f"Which students have a name starting with '{letter}'?",
            f"SELECT name FROM student WHERE name LIKE '{letter}%'")


def _t_1_6(k):
    n = 3 + k % 10
    return (f"Show the {n} best-paid instructors.",
            f"SELECT name FROM instructor ORDER BY salary DESC LIMIT {n}")


def _t_2_1(k):
    yr = 2008 + k % 14
    return (f"What is the average salary of instructors hired after {yr}?",
            f"SELECT AVG(salary) FROM instructor WHERE hire_year > {yr}")


def _t_2_2(k):
    yr = 1 + k % 4
    return (f"Which departments have year-{yr} students?",
            f"SELECT DISTINCT dept_id FROM student WHERE year = {yr}")


def _t_2_3(k):
    cut = round(2.0 + 0.1 * (k % 15), 1)
    return (f"How many students above GPA {cut} are in each department?",
            f"SELECT dept_id, COUNT(*) FROM student WHERE gpa > {cut} "
            f"GROUP BY dept_id")


def _t_2_4(k):
    lvl = 100 * (1 + k % 4)
    return (f"Count level-{lvl}-and-up courses per department and credit value.",
            f"SELECT dept_id, credits, COUNT(*) FROM course WHERE level >= {lvl} "
            f"GROUP BY dept_id, credits")


def _t_2_5(k):
    n = 2 + k % 8
    return (f"Which departments offer more than {n} courses?",
            f"SELECT dept_id, COUNT(*) FROM course GROUP BY dept_id "
            f"HAVING COUNT(*) > {n}")


def _t_2_6(k):
    d = 1 + k % 12
    return (f"What is the salary spread in department {d}?",
            f"SELECT MAX(salary) - MIN(salary) FROM instructor WHERE dept_id = {d}")


def _t_3_1(k):
    yr = 1 + k % 4
    return (f"Show year-{yr} students with their department names.",
            f"SELECT s.name, d.name AS dept FROM student s "
            f"JOIN department d ON s.dept_id = d.id WHERE s.year = {yr}")


def _t_3_2(k):
    cr = 2 + k % 3
    return (f"Which students took a {cr}-credit course, and which course?",
            f"SELECT s.name, c.title FROM enrollment e "
            f"JOIN student s ON e.student_id = s.id "
            f"JOIN course c ON e.course_id = c.id WHERE c.credits = {cr}")


def _t_3_3(k):
    b = 150000 + 50000 * (k % 10)
    return (f"List departments with budget over {b} and their heads, if any.",
            f"SELECT d.name, i.name AS head FROM department d "
            f"LEFT JOIN instructor i ON d.head_id = i.id WHERE d.budget > {b}")


def _t_3_4(k):
    s = 55000 + 5000 * (k % 12)
    return (f"Which instructors earning over {s} have a manager, and whom?",
            f"SELECT e.name, m.name AS manager FROM instructor e "
            f"JOIN instructor m ON e.manager_id = m.id WHERE e.salary > {s}")


def _t_3_5(k):
    yr = 2008 + k % 14
    return (f"How many instructors hired after {yr} are in each department?",
            f"SELECT d.name, COUNT(*) FROM instructor i "
            f"JOIN department d ON i.dept_id = d.id WHERE i.hire_year > {yr} "
            f"GROUP BY d.name")


def _t_3_6(k):
    sid = 1 + k % 50
    return (f"Pair student {sid} with every course title.",
            f"SELECT s.name, c.title FROM student s CROSS JOIN course c "
            f"WHERE s.id = {sid}")


def _t_4_1(k):
    bump = 100 * (k % 10)
    return (f"Which instructors earn more than the average salary plus {bump}?",
            f"SELECT name FROM instructor WHERE salary > "
            f"(SELECT AVG(salary) + {bump} FROM instructor)")


def _t_4_2(k):
    b = 200000 + 50000 * (k % 10)
    return (f"Which students are in a department with budget above {b}?",
            f"SELECT name FROM student WHERE dept_id IN "
            f"(SELECT id FROM department WHERE budget > {b})")


def _t_4_3(k):
    g = round(2.0 + 0.25 * (k % 8), 2)
    return (f"Which students earned at least one grade of {g} or better?",
            f"SELECT s.name FROM student s WHERE EXISTS "
            f"(SELECT 1 FROM enrollment e WHERE e.student_id = s.id "
            f"AND e.grade >= {g})")


def _t_4_4(k):
    d = 1 + k % 12
    return (f"Which instructors out-earn everyone in department {d}?",
            f"SELECT name FROM instructor WHERE salary > ALL "
            f"(SELECT salary FROM instructor WHERE dept_id = {d})")


def _t_4_5(k):
    n = 10 + k % 20
    return (f"Which departments have more than {n} students, and how many?",
            f"SELECT t.dept_id, t.n FROM (SELECT dept_id, COUNT(*) AS n "
            f"FROM student GROUP BY dept_id) t WHERE t.n > {n}")


def _t_4_6(k):
    lvl = 100 * (1 + k % 4)
    return (f"For each department, how many courses at level {lvl} or higher?",
            f"SELECT d.name, (SELECT COUNT(*) FROM course c "
            f"WHERE c.dept_id = d.id AND c.level >= {lvl}) AS n "
            f"FROM department d")


def _t_5_1(k):
    s = 90000 + 5000 * (k % 10)
    g = round(3.0 + 0.1 * (k % 9), 1)
    return (f"Who earns over {s} or studies with GPA over {g}?",
            f"SELECT name FROM instructor WHERE salary > {s} "
            f"UNION SELECT name FROM student WHERE gpa > {g}")


def _t_5_2(k):
    yr = 1 + k % 4
    return (f"Which departments have both year-{yr} students and instructors?",
            f"SELECT dept_id FROM student WHERE year = {yr} "
            f"INTERSECT SELECT dept_id FROM instructor")


def _t_5_3(k):
    g = round(2.0 + 0.25 * (k % 8), 2)
    return (f"Which students never scored {g} or better?",
            f"SELECT id FROM student EXCEPT SELECT student_id "
            f"FROM enrollment WHERE grade >= {g}")


def _t_5_4(k):
    cut = round(2.8 + 0.1 * (k % 10), 1)
    return (f"Mark each student as above or at-most {cut} GPA.",
            f"SELECT name, CASE WHEN gpa > {cut} THEN 'above' ELSE 'at-most' "
            f"END AS band FROM student")


def _t_5_5(k):
    b = 300000 + 50000 * (k % 10)
    return (f"Using a CTE, list departments with budget above {b}.",
            f"WITH rich AS (SELECT id, name FROM department "
            f"WHERE budget > {b}) SELECT name FROM rich")


def _t_5_6(k):
    yr = 1 + k % 4
    g = round(3.0 + 0.25 * (k % 4), 2)
    return (f"Which year-{yr} students also scored {g} or better somewhere?",
            f"WITH a AS (SELECT id FROM student WHERE year = {yr}), "
            f"b AS (SELECT student_id AS id FROM enrollment WHERE grade >= {g}) "
            f"SELECT id FROM a INTERSECT SELECT id FROM b")


def _t_6_1(k):
    yr = 2008 + k % 14
    return (f"Rank instructors hired since {yr} by salary.",
            f"SELECT name, RANK() OVER (ORDER BY salary DESC) "
            f"FROM instructor WHERE hire_year >= {yr}")


def _t_6_2(k):
    yr = 1 + k % 4
    return (f"Show a running count of year-{yr} students by GPA.",
            f"SELECT name, COUNT(*) OVER (ORDER BY gpa) "
            f"FROM student WHERE year = {yr}")


def _t_6_3(k):
    s = 55000 + 5000 * (k % 12)
    return (f"Rank instructors above {s} inside their departments.",
            f"SELECT name, RANK() OVER (PARTITION BY dept_id "
            f"ORDER BY salary DESC) FROM instructor WHERE salary > {s}")


def _t_6_4(k):
    w = 1 + k % 3
    return (f"Smooth student GPAs over a window of {w} preceding rows.",
            f"SELECT id, AVG(gpa) OVER (ORDER BY id ROWS BETWEEN {w} "
            f"PRECEDING AND CURRENT ROW) FROM student")


def _t_6_5(k):
    n = 5 + k % 20
    return (f"Generate the numbers 1 through {n}.",
            f"WITH RECURSIVE seq(n) AS (SELECT 1 UNION ALL "
            f"SELECT n + 1 FROM seq WHERE n < {n}) SELECT n FROM seq")


def _t_6_6(k):
    r = 3 + k % 10
    return (f"Who are the top {r} students by GPA rank?",
            f"SELECT t.name, t.r FROM (SELECT name, RANK() OVER "
            f"(ORDER BY gpa DESC) AS r FROM student) t WHERE t.r <= {r}")


def _r_1_1(k):
    t = ("customer", "product", "orders", "order_item")[k % 4]
    return f"Show every row of {t}.", f"SELECT * FROM {t}"


def _r_1_2(k):
    picks = [("name", "customer"), ("city", "customer"), ("name", "product"),
             ("category", "product"), ("status", "orders"),
             ("price", "product")]
    col, t = picks[k % len(picks)]
    return f"List the {col} of every {t}.", f"SELECT {col} FROM {t}"


def _r_1_3(k):
    cut = 20 + 10 * (k % 12)
    return (f"Which products cost more than {cut}?",
            f"SELECT name FROM product WHERE price > {cut}")


def _r_1_4(k):
    yr = 2012 + k % 10
    return (f"Which VIP customers signed up after {yr}?",
            f"SELECT name FROM customer WHERE vip = 1 AND signup_year > {yr}")


def _r_1_5(k):
    letter = _LETTERS[k % len(_LETTERS)]
    return (f"Which customers have a name starting with '{letter}'?",
            f"SELECT name FROM customer WHERE name LIKE '{letter}%'")


def _r_1_6(k):
    n = 3 + k % 10
    return (f"Show the {n} most expensive products.",
            f"SELECT name FROM product ORDER BY price DESC LIMIT {n}")


def _r_2_1(k):
    q = 1 + k % 5
    return (f"What is the average unit price on lines of at least {q} units?",
            f"SELECT AVG(unit_price) FROM order_item WHERE qty >= {q}")


def _r_2_2(k):
    yr = 2012 + k % 10
    return (f"Which cities have customers who signed up in {yr}?",
            f"SELECT DISTINCT city FROM customer WHERE signup_year = {yr}")


def _r_2_3(k):
    yr = 2010 + k % 12
    return (f"How many post-{yr} signups are in each city?",
            f"SELECT city, COUNT(*) FROM customer WHERE signup_year > {yr} "
            f"GROUP BY city")


def _r_2_4(k):
    yr = 2010 + k % 12
    return (f"Count customers per city and VIP flag since {yr}.",
            f"SELECT city, vip, COUNT(*) FROM customer "
            f"WHERE signup_year >= {yr} GROUP BY city, vip")


def _r_2_5(k):
    n = 2 + k % 8
    return (f"Which customers placed more than {n} orders?",
            f"SELECT customer_id, COUNT(*) FROM orders GROUP BY customer_id "
            f"HAVING COUNT(*) > {n}")


def _r_2_6(k):
    q = 1 + k % 5
    return (f"What is the unit-price spread on {q}-unit lines?",
            f"SELECT MAX(unit_price) - MIN(unit_price) FROM order_item "
            f"WHERE qty = {q}")


def _r_3_1(k):
    d = 30 + 30 * (k % 10)
    return (f"Show orders placed after day {d} with customer names.",
            f"SELECT c.name, o.status FROM orders o "
            f"JOIN customer c ON o.customer_id = c.id WHERE o.placed_day > {d}")


def _r_3_2(k):
    q = 1 + k % 5
    return (f"Who bought at least {q} units of something, and how many?",
            f"SELECT c.name, oi.qty FROM order_item oi "
            f"JOIN orders o ON oi.order_id = o.id "
            f"JOIN customer c ON o.customer_id = c.id WHERE oi.qty >= {q}")


def _r_3_3(k):
    cut = 50 + 25 * (k % 10)
    return (f"List products over {cut} with any line quantities.",
            f"SELECT p.name, oi.qty FROM product p "
            f"LEFT JOIN order_item oi ON oi.product_id = p.id "
            f"WHERE p.price > {cut}")


def _r_3_4(k):
    cid = 1 + k % 50
    return (f"Which customers share a city with customer {cid}?",
            f"SELECT a.name, b.name FROM customer a "
            f"JOIN customer b ON a.city = b.city WHERE a.id = {cid}")


def _r_3_5(k):
    d = 30 + 30 * (k % 10)
    return (f"How many orders after day {d} came from each city?",
            f"SELECT c.city, COUNT(*) FROM orders o "
            f"JOIN customer c ON o.customer_id = c.id "
            f"WHERE o.placed_day > {d} GROUP BY c.city")


def _r_3_6(k):
    cid = 1 + k % 50
    return (f"Pair customer {cid} with every product name.",
            f"SELECT c.name, p.name FROM customer c CROSS JOIN product p "
            f"WHERE c.id = {cid}")


def _r_4_1(k):
    bump = 5 * (k % 10)
    return (f"Which products cost more than the average price plus {bump}?",
            f"SELECT name FROM product WHERE price > "
            f"(SELECT AVG(price) + {bump} FROM product)")


def _r_4_2(k):
    d = 30 + 30 * (k % 10)
    return (f"Which customers ordered after day {d}?",
            f"SELECT name FROM customer WHERE id IN "
            f"(SELECT customer_id FROM orders WHERE placed_day > {d})")


def _r_4_3(k):
    q = 1 + k % 5
    return (f"Which products were bought {q} or more units at a time?",
            f"SELECT p.name FROM product p WHERE EXISTS "
            f"(SELECT 1 FROM order_item oi WHERE oi.product_id = p.id "
            f"AND oi.qty >= {q})")


def _r_4_4(k):
    q = 1 + k % 5
    return (f"Which products out-price every {q}-unit line?",
            f"SELECT name FROM product WHERE price > ALL "
            f"(SELECT unit_price FROM order_item WHERE qty = {q})")


def _r_4_5(k):
    n = 2 + k % 8
    return (f"Which customers placed more than {n} orders, and how many?",
            f"SELECT t.customer_id, t.n FROM (SELECT customer_id, "
            f"COUNT(*) AS n FROM orders GROUP BY customer_id) t "
            f"WHERE t.n > {n}")


def _r_4_6(k):
    d = 30 + 30 * (k % 10)
    return (f"For each customer, how many orders after day {d}?",
            f"SELECT c.name, (SELECT COUNT(*) FROM orders o "
            f"WHERE o.customer_id = c.id AND o.placed_day > {d}) AS n "
            f"FROM customer c")


def _r_5_1(k):
    cut = 50 + 25 * (k % 10)
    yr = 2012 + k % 10
    return (f"Which names are on products over {cut} or post-{yr} customers?",
            f"SELECT name FROM product WHERE price > {cut} "
            f"UNION SELECT name FROM customer WHERE signup_year > {yr}")


def _r_5_2(k):
    d = 30 + 30 * (k % 10)
    return (f"Which VIP customers ordered after day {d}?",
            f"SELECT customer_id FROM orders WHERE placed_day > {d} "
            f"INTERSECT SELECT id FROM customer WHERE vip = 1")


def _r_5_3(k):
    q = 1 + k % 5
    return (f"Which products never sold {q} or more units at once?",
            f"SELECT id FROM product EXCEPT SELECT product_id "
            f"FROM order_item WHERE qty >= {q}")


def _r_5_4(k):
    cut = 40 + 20 * (k % 10)
    return (f"Tag each product as over or within {cut}.",
            f"SELECT name, CASE WHEN price > {cut} THEN 'premium' "
            f"ELSE 'standard' END AS tier FROM product")


def _r_5_5(k):
    cut = 50 + 25 * (k % 10)
    return (f"Using a CTE, list products priced above {cut}.",
            f"WITH pricey AS (SELECT id, name FROM product "
            f"WHERE price > {cut}) SELECT name FROM pricey")


def _r_5_6(k):
    d = 30 + 30 * (k % 10)
    return (f"Which VIP customers also ordered after day {d}?",
            f"WITH a AS (SELECT id FROM customer WHERE vip = 1), "
            f"b AS (SELECT customer_id AS id FROM orders "
            f"WHERE placed_day > {d}) "
            f"SELECT id FROM a INTERSECT SELECT id FROM b")


def _r_6_1(k):
    cut = 20 + 10 * (k % 12)
    return (f"Rank products over {cut} by price.",
            f"SELECT name, RANK() OVER (ORDER BY price DESC) "
            f"FROM product WHERE price > {cut}")


def _r_6_2(k):
    yr = 2010 + k % 12
    return (f"Show a running count of post-{yr} customers by signup year.",
            f"SELECT name, COUNT(*) OVER (ORDER BY signup_year) "
            f"FROM customer WHERE signup_year >= {yr}")


def _r_6_3(k):
    cut = 20 + 10 * (k % 12)
    return (f"Rank products over {cut} inside their categories.",
            f"SELECT name, RANK() OVER (PARTITION BY category "
            f"ORDER BY price DESC) FROM product WHERE price > {cut}")


def _r_6_4(k):
    w = 1 + k % 3
    return (f"Smooth product prices over a window of {w} preceding rows.",
            f"SELECT id, AVG(price) OVER (ORDER BY id ROWS BETWEEN {w} "
            f"PRECEDING AND CURRENT ROW) FROM product")


def _r_6_5(k):
    n = 4 + k % 20
    return (f"Generate the even numbers up to {2 * n}.",
            f"WITH RECURSIVE seq(n) AS (SELECT 2 UNION ALL "
            f"SELECT n + 2 FROM seq WHERE n < {2 * n}) SELECT n FROM seq")


def _r_6_6(k):
    r = 3 + k % 10
    return (f"Who are the top {r} products by price rank?",
            f"SELECT t.name, t.r FROM (SELECT name, RANK() OVER "
            f"(ORDER BY price DESC) AS r FROM product) t WHERE t.r <= {r}")


TEMPLATE_BANK: dict[str, dict] = {
    "1.1": {"campus": _t_1_1, "retail": _r_1_1},
    "1.2": {"campus": _t_1_2, "retail": _r_1_2},
    "1.3": {"campus": _t_1_3, "retail": _r_1_3},
    "1.4": {"campus": _t_1_4, "retail": _r_1_4},
    "1.5": {"campus": _t_1_5, "retail": _r_1_5},
    "1.6": {"campus": _t_1_6, "retail": _r_1_6},
    "2.1": {"campus": _t_2_1, "retail": _r_2_1},
    "2.2": {"campus": _t_2_2, "retail": _r_2_2},
    "2.3": {"campus": _t_2_3, "retail": _r_2_3},
    "2.4": {"campus": _t_2_4, "retail": _r_2_4},
    "2.5": {"campus": _t_2_5, "retail": _r_2_5},
    "2.6": {"campus": _t_2_6, "retail": _r_2_6},
    "3.1": {"campus": _t_3_1, "retail": _r_3_1},
    "3.2": {"campus": _t_3_2, "retail": _r_3_2},
    "3.3": {"campus": _t_3_3, "retail": _r_3_3},
    "3.4": {"campus": _t_3_4, "retail": _r_3_4},
    "3.5": {"campus": _t_3_5, "retail": _r_3_5},
    "3.6": {"campus": _t_3_6, "retail": _r_3_6},
    "4.1": {"campus": _t_4_1, "retail": _r_4_1},
    "4.2": {"campus": _t_4_2, "retail": _r_4_2},
    "4.3": {"campus": _t_4_3, "retail": _r_4_3},
    "4.4": {"campus": _t_4_4, "retail": _r_4_4},
    "4.5": {"campus": _t_4_5, "retail": _r_4_5},
    "4.6": {"campus": _t_4_6, "retail": _r_4_6},
    "5.1": {"campus": _t_5_1, "retail": _r_5_1},
    "5.2": {"campus": _t_5_2, "retail": _r_5_2},
    "5.3": {"campus": _t_5_3, "retail": _r_5_3},
    "5.4": {"campus": _t_5_4, "retail": _r_5_4},
    "5.5": {"campus": _t_5_5, "retail": _r_5_5},
    "5.6": {"campus": _t_5_6, "retail": _r_5_6},
    "6.1": {"campus": _t_6_1, "retail": _r_6_1},
    "6.2": {"campus": _t_6_2, "retail": _r_6_2},
    "6.3": {"campus": _t_6_3, "retail": _r_6_3},
    "6.4": {"campus": _t_6_4, "retail": _r_6_4},
    "6.5": {"campus": _t_6_5, "retail": _r_6_5},
    "6.6": {"campus": _t_6_6, "retail": _r_6_6},
}


def template_pair(subcategory: str, db_id: str, k: int) -> tuple[str, str] | None:
    bank = TEMPLATE_BANK.get(subcategory)
    if not bank:
        return None
    fn = bank.get(db_id)
    if fn is None:
        return None
    return fn(k)


def supported_dbs(subcategory: str) -> list[str]:
    return sorted(TEMPLATE_BANK.get(subcategory, {}))
