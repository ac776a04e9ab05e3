from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from ifolb import bilattice as bl
from ifolb.bilattice import BOT, F, T, TOP
from ifolb.knowledge import (
    KBError,
    LearnEvent,
    PredicateDecl,
    Thesis,
    build_kdb,
    cka_value,
    declare,
    dnknow,
    dumps,
    eval_reified,
    is_saturated,
    k_leq_val,
    learn,
    loads,
    new_state,
    persist,
    restore,
    step_fk,
    t_leq_val,
    truth_concept_ext,
)
from ifolb.semantics import CyclicReification, MRelation, SentenceHandle, evaluate
from ifolb.deduction import register_paradox
from ifolb.syntax import parse

import oracles as o
from helpers import fresh, ground, rand_events

pa = ground("p", "a")


def test_learn_transitions():
    s = fresh()
    s1 = learn(s, LearnEvent(pa, T, 1))
    assert s1.value(pa) is T
    assert s.value(pa) is BOT  # old snapshot untouched
    s2 = learn(learn(s, LearnEvent(pa, F, 1)), LearnEvent(pa, T, 2))
    assert s2.value(pa) is TOP
    s3 = learn(s2, LearnEvent(pa, F, 3))
    assert s3.value(pa) is TOP
    assert s3.history[-1] == LearnEvent(pa, F, 3)


def test_learn_leaves_other_atoms_alone():
    s = learn(fresh(), LearnEvent(pa, T, 1))
    assert all(s.value(a) is BOT for a in s.base if a != pa)


@pytest.mark.parametrize("text", ["T(<<p(a)>>)", "Know(now, me, <<p(a)>>)", "id(a, a)"])
def test_learning_distinguished_atoms_fails(text):
    s = declare(fresh(), {"now": "time", "me": "individual"})
    with pytest.raises(KBError):
        learn(s, LearnEvent(parse(text), T, 1))


def test_learn_rejects_stale_timestamps_and_bad_atoms():
    s = learn(fresh(), LearnEvent(pa, T, 5))
    with pytest.raises(KBError):
        learn(s, LearnEvent(ground("p", "b"), T, 5))
    with pytest.raises(KBError):
        learn(s, LearnEvent(ground("zz", "a"), T, 6))
    with pytest.raises(KBError):
        learn(s, LearnEvent(ground("p", "a", "b"), T, 6))
    with pytest.raises(KBError):
        learn(s, LearnEvent(ground("p", "nobody"), T, 6))
    with pytest.raises(KBError):
        LearnEvent(pa, TOP, 7)
    with pytest.raises(KBError):
        LearnEvent(parse("p(X)"), T, 7)


def test_learning_a_registered_sentence_fails():
    s = register_paradox(fresh(), "liar", parse("~T(<<liar>>)"))
    with pytest.raises(KBError):
        learn(s, LearnEvent(parse("liar"), T, 1))


def test_signature_checks():
    s = new_state({"a": "individual", "now": "time"}, [PredicateDecl("at", 2, ("time", "individual"))])
    learn(s, LearnEvent(parse("at(now, a)"), T, 1))
    with pytest.raises(KBError):
        learn(s, LearnEvent(parse("at(a, now)"), T, 1))
    with pytest.raises(KBError):
        PredicateDecl("bad", 2, ("time",))
    with pytest.raises(KBError):
        PredicateDecl("bad", 1, ("colour",))


def test_step_fk():
    s = fresh()
    assert step_fk(s, []) == s
    out = step_fk(s, [LearnEvent(pa, T, 1), LearnEvent(pa, F, 1)])
    assert out.value(pa) is TOP and out.timestamp == 1
    assert k_leq_val(s, out)


def test_valuation_orders():
    s = fresh()
    a = learn(s, LearnEvent(pa, F, 1))
    b = learn(s, LearnEvent(pa, T, 1))
    assert k_leq_val(a, a) and k_leq_val(s, a) and k_leq_val(s, b)
    assert not k_leq_val(a, b) and not k_leq_val(b, a)
    assert t_leq_val(a, b) and not t_leq_val(b, a)
    other = new_state(["z"], [PredicateDecl("p", 1)])
    with pytest.raises(KBError):
        k_leq_val(s, other)


def test_saturation():
    s = fresh()
    ok, unknown = is_saturated(s)
    assert not ok and unknown == s.base and len(s.base) == 2 + 4 + 1
    ts = 0
    last = None
    for atom in sorted(s.base, key=str):
        ts += 1
        s = learn(s, LearnEvent(atom, T, ts))
        last = atom
    assert is_saturated(s) == (True, frozenset())
    s2 = fresh()
    for i, atom in enumerate(sorted(s2.base - {last}, key=str), 1):
        s2 = learn(s2, LearnEvent(atom, F, i))
    assert is_saturated(s2) == (False, frozenset({last}))


def test_all_top_is_a_fixpoint():
    s = fresh()
    events = [LearnEvent(a, x, 1) for a in s.base for x in (T, F)]
    s = step_fk(s, events)
    again = step_fk(s, [LearnEvent(a, T, 2) for a in s.base])
    assert again.valuation.values == s.valuation.values


def test_knowledge_database():
    s = fresh()
    assert build_kdb(s).projected == {"p": frozenset(), "q": frozenset()}  # r is nullary: no K entry
    s = step_fk(s, [LearnEvent(ground("q", "a", "b"), T, 1), LearnEvent(ground("q", "a", "b"), F, 1)])
    kdb = build_kdb(s)
    assert ("a", "b", TOP) in kdb.metaknowledge["q"]
    assert kdb.projected["q"] == {("a", "b")}
    assert kdb.contains(ground("q", "a", "b")) and not kdb.contains(ground("q", "b", "a"))
    assert ("a", "a", T) in kdb.fixed["id"] and ("a", "b", F) in kdb.fixed["id"]
    assert "id" not in kdb.relations


def test_cka_value():
    s = learn(fresh(), LearnEvent(ground("q", "a", "b"), T, 1))
    assert cka_value(s, ground("q", "b", "b")) is BOT
    assert cka_value(s, ground("q", "a", "b")) is T
    with pytest.raises(KBError):
        cka_value(s, ground("nope", "a"))
    with pytest.raises(KBError):
        cka_value(s, parse("p(X)"))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**9))
def test_cka_matches_evaluate_and_kdb(seed):
    rng = o.seeded(seed)
    s = fresh()
    for e in rand_events(rng, s, rng.randint(0, 8)):
        s = learn(s, e)
    kdb = build_kdb(s)
    for a in s.base:
        assert cka_value(s, a) is evaluate(s.valuation, a)
        assert (cka_value(s, a) is BOT) == (not kdb.contains(a))


def test_eval_reified():
    s = register_paradox(learn(fresh(), LearnEvent(pa, T, 1)), "liar", parse("~T(<<liar>>)"))
    assert eval_reified(s, parse("Know(now, me, <<p(a)>>)")) is T
    assert eval_reified(s, parse("T(<<liar>>)")) is TOP
    assert eval_reified(s, parse("T(<<p_f>>)")) is F
    with pytest.raises(KBError):
        eval_reified(s, parse("T(a)"))
    with pytest.raises(KBError):
        eval_reified(s, parse("p(a)"))
    v = s.valuation.with_handle(SentenceHandle("g", parse("~T(<<g>>)")))
    with pytest.raises(CyclicReification):
        eval_reified(replace(s, valuation=v), parse("T(<<g>>)"))


def test_dnknow():
    s = learn(fresh(), LearnEvent(pa, T, 1))
    f, value, text = dnknow(s, "me", "in-present", ground("p", "b"))
    assert value is T and text == "I do not know whether p(b)"
    assert str(f) == "p_bot <-> Know(in-present, me, <<p(b)>>)"
    _, value, _ = dnknow(s, "me", "in-present", pa)
    assert value is F
    assert dnknow(s, "b", "in-past", pa)[2] == "b did not know whether p(a)"
    assert dnknow(s, "b", "in-present", pa)[2] == "b does not know whether p(a)"
    assert dnknow(s, "me", "in-future", pa)[2] == "I will not know whether p(a)"
    with pytest.raises(KBError):
        dnknow(s, "me", "tomorrow", pa)


def test_truth_concept_extension():
    s = fresh()
    assert truth_concept_ext(s).is_empty
    s = step_fk(s, [LearnEvent(pa, T, 1), LearnEvent(pa, F, 1)])
    R = truth_concept_ext(s)
    assert R.arity == 2 and len(R) == 1
    (u, a) = next(iter(R))
    assert a is TOP and u.degree == 1
    # h(u) = {a} iff (u, a) is in the truth concept
    assert MRelation.singleton(evaluate(s.valuation, pa)) == MRelation.singleton(a)


def test_roundtrip_empty_and_file(tmp_path):
    s = fresh()
    assert loads(dumps(s)) == s
    path = tmp_path / "kb.txt"
    s = register_paradox(learn(s, LearnEvent(pa, T, 3)), "liar", parse("~T(<<liar>>)"))
    persist(s, path)
    assert restore(path) == s


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**9))
def test_roundtrip_after_random_learns(seed):
    rng = o.seeded(seed)
    s = fresh()
    for e in rand_events(rng, s, 50):
        s = learn(s, e)
    s2 = loads(dumps(s))
    assert s2 == s and s2.valuation == s.valuation


def test_rules_and_derived_lines_roundtrip():
    text = "\n".join([
        "version 1",
        "domain individual a me",
        "domain time now",
        "pred p/1",
        "rule p(a) -> p(a) >= t",
        "rule p(a) >= f",
        "define g : p(a) & p_t",
        "paradox goedel = bot : ~T(<<goedel>>)",
        "weak_eq a me = t",
        "fact p(a) = top @ 2",
        "derived Know(now, me, <<p(a)>>)",
    ])
    s = loads(text)
    assert s.rules[1] == Thesis(parse("p(a)"), F)
    assert s.value(pa) is TOP
    assert evaluate(s.valuation, parse("goedel")) is BOT
    assert evaluate(s.valuation, parse("id_in(a, me)")) is T
    assert loads(dumps(s)) == s


@pytest.mark.parametrize(
    "text,needle",
    [
        ("version 2", "version"),
        ("bogus line", "unknown directive"),
        ("domain individual a\npred p/1\nfact p(a) = t @ 2\nfact p(a) = t @ 2", "duplicate fact"),
        ("domain individual a\npred p/1\nfact p(a) = t @ 2\nfact p(a) = f @ 1", "non-monotone"),
        ("domain individual a\npred p/1\nfact p(a) = bot @ 2", "expected: fact"),
        ("pred p/x", "expected: pred"),
        ("domain individual a\npred p/1\nfact p(a) = t @ noon", "timestamp"),
        ("paradox liar : ~T(<<liar>>)\nparadox liar : ~T(<<p_t>>)", "different body"),
    ],
)
def test_malformed_files(text, needle):
    with pytest.raises(KBError) as exc:
        loads(text)
    assert needle in str(exc.value)


def test_duplicate_fact_names_both_lines():
    with pytest.raises(KBError) as exc:
        loads("domain individual a\npred p/1\nfact p(a) = t @ 2\nfact p(a) = t @ 2")
    assert "line 4" in str(exc.value) and "line 3" in str(exc.value)


def test_iso_timestamps():
    s = loads("domain individual a\npred p/1\nfact p(a) = t @ 2024-05-01T10:00:00")
    assert s.timestamp > 1_700_000_000


def test_restore_missing_file(tmp_path):
    with pytest.raises(KBError):
        restore(tmp_path / "missing.kb")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**9))
def test_learning_is_idempotent_and_order_free_in_a_batch(seed):
    rng = o.seeded(seed)
    s = fresh()
    events = [LearnEvent(e.atom, e.value, 1) for e in rand_events(rng, s, 6)]
    a = step_fk(s, events)
    shuffled = list(events)
    rng.shuffle(shuffled)
    b = step_fk(s, shuffled)
    assert a.valuation == b.valuation
    again = step_fk(a, [LearnEvent(e.atom, e.value, 2) for e in events])
    assert again.valuation == a.valuation


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**9))
def test_monotone_learning(seed):
    rng = o.seeded(seed)
    prev = fresh()
    for e in rand_events(rng, prev, 12):
        nxt = learn(prev, e)
        assert k_leq_val(prev, nxt)
        old, new = prev.value(e.atom), nxt.value(e.atom)
        assert new is o.o_kjoin(old, e.value)
        prev = nxt


def test_declare_extends_base():
    s = fresh()
    s2 = declare(s, {"c": "individual"}, [PredicateDecl("w", 1)])
    assert ground("w", "c") in s2.base and ground("p", "c") in s2.base
    with pytest.raises(KBError):
        declare(s, predicates=[PredicateDecl("p", 2)])
    with pytest.raises(KBError):
        new_state(["a"], [PredicateDecl("T", 2)])


def test_k_join_is_learning():
    for old in bl.VALUES:
        for ev in (T, F):
            assert bl.k_join(old, ev) is o.o_kjoin(old, ev)
