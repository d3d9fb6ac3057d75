"""Independent tf-idf cosine oracle for the shipped template bank.

Tokens: lowercase alphanumeric runs. Document = keywords + description.
Weight = term count * (N / document frequency). Query tokens unknown to the
bank are dropped. Prints the ranking for each canonical query.
"""
import json, math, re, sys
from collections import Counter

bank = json.load(open(sys.argv[1]))
tok = lambda s: re.findall(r"[a-z0-9]+", s.lower())
docs = [Counter(sum((tok(k) for k in t["keywords"]), []) + tok(t["description"])) for t in bank]
N = len(docs)
df = Counter(t for d in docs for t in d)
idf = {t: N / df[t] for t in df}

def vec(c):
    return {t: n * idf[t] for t, n in c.items() if t in idf}

def cos(a, b):
    dot = sum(a[t] * b.get(t, 0.0) for t in a)
    na = math.sqrt(sum(v * v for v in a.values())); nb = math.sqrt(sum(v * v for v in b.values()))
    return 0.0 if na == 0 or nb == 0 else dot / (na * nb)

queries = [l.rstrip("\n").split("\t") for l in open(sys.argv[2]) if l.strip()]
for q, expect in queries:
    qv = vec(Counter(tok(q)))
    ranked = sorted(((cos(qv, vec(d)), bank[i]["template_id"]) for i, d in enumerate(docs)), key=lambda x: (-x[0], x[1]))
    ok = ranked[0][1] == expect
    print(f"{'OK ' if ok else 'BAD'} {q!r:40} top={ranked[0][1]} {ranked[0][0]:.6f} second={ranked[1][1]} {ranked[1][0]:.6f}")

# With a third argument, also write every (query, template, score) triple.
if len(sys.argv) > 3:
    with open(sys.argv[3], "w") as out:
        for q, _ in queries:
            qv = vec(Counter(tok(q)))
            for i, d in enumerate(docs):
                out.write(f"{q}\t{bank[i]['template_id']}\t{cos(qv, vec(d)):.15f}\n")
