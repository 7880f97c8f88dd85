from adtape import DAG, DCG, record_problem
from adtape.dot import to_dot
from adtape.problems import IntroExample


def test_intro_dag_dot():
    text = to_dot(record_problem(IntroExample(), [1.0], mode=DAG))
    lines = text.splitlines()
    assert lines[0] == "digraph tape {"
    assert lines[-1] == "}"
    assert '  "0" [shape=box];' in lines
    assert '  "6" [shape=doublecircle];' in lines
    assert '  "0" -> "1" [label="0.54"];' in lines
    assert text.count("->") == 8


def test_intro_dcg_dot_shades_lvalues():
    text = to_dot(record_problem(IntroExample(), [1.0], mode=DCG))
    assert '"-1" [shape=box style=filled fillcolor="lightgrey"];' in text
    assert '"-4" [shape=doublecircle style=filled fillcolor="lightgrey"];' in text
    assert '"0"' in text  # remainder temporaries are plain


def test_custom_graph_name():
    text = to_dot(record_problem(IntroExample(), [1.0], mode=DAG), name="g1")
    assert text.startswith("digraph g1 {")
