"""Hand-transcribed execution scenarios.

DOMINO: three operators on a cycle P1 -> P2 -> P3 -> P1 with checkpoints
C<1,1..3>, C<2,1..3>, C<3,1..2> and messages m1..m6. The picture is only
available as a drawing; the transcription keeps the narrated invalidation
order. Starting from the latest checkpoints {3, 3, 2}:

    m6 (P3 after C<3,2> -> P1 before C<1,3>)  invalidates C<1,3>
    m4 (P1 after C<1,2> -> P2 before C<2,3>)  invalidates C<2,3>
    m5 (P2 after C<2,2> -> P3 before C<3,2>)  invalidates C<3,2>
    m3 (P3 after C<3,1> -> P1 before C<1,2>)  invalidates C<1,2>
    m1 (P1 after C<1,1> -> P2 before C<2,2>)  invalidates C<2,2>

m2 (P2 -> P3, both inside interval 1) completes the ring but is not an
orphan of the final line. The only recovery line left is {1, 1, 1}.

TIMELINE: a small three-operator run whose checkpoint graph needs two
rollback steps; the exact cross-edge set and each root set are listed.
"""

P1, P2, P3 = "P1", "P2", "P3"
DOMINO_CHANNELS = {0: (P1, P2), 1: (P2, P3), 2: (P3, P1)}
DOMINO_SCRIPT = [
    ("ckpt", P1), ("ckpt", P2), ("ckpt", P3),
    ("send", 2), ("recv", 2),          # m3
    ("send", 0), ("recv", 0),          # m1
    ("send", 1), ("recv", 1),          # m2
    ("ckpt", P1), ("ckpt", P2),        # C<1,2>, C<2,2>
    ("send", 0), ("recv", 0),          # m4
    ("send", 1), ("recv", 1),          # m5
    ("ckpt", P3),                      # C<3,2>
    ("send", 2), ("recv", 2),          # m6
    ("ckpt", P1), ("ckpt", P2),        # C<1,3>, C<2,3>
]
DOMINO_LINE = {P1: 1, P2: 1, P3: 1}

# A -> B, B -> C, C -> A
TIMELINE_CHANNELS = {0: ("A", "B"), 1: ("B", "C"), 2: ("C", "A")}
TIMELINE_SCRIPT = [
    ("ckpt", "A"), ("ckpt", "B"), ("ckpt", "C"),
    ("send", 0), ("recv", 0),          # a1: A after C<A,1> -> B before C<B,2>
    ("send", 1), ("recv", 1),          # b1: B after C<B,1> -> C before C<C,2>
    ("ckpt", "B"), ("ckpt", "C"),      # C<B,2>, C<C,2>
    ("send", 2),                       # c1 still in flight: no edge
]
# every sender checkpoint before the send -> every receiver checkpoint after the receive
TIMELINE_EDGES = {
    (("A", 0), ("B", 2)), (("A", 1), ("B", 2)),
    (("B", 0), ("C", 2)), (("B", 1), ("C", 2)),
}
# step 1 marks C<B,2> (reached from C<A,1>); step 2 marks C<C,2> (reached from C<B,1>)
TIMELINE_ROOTS = [{"A": 1, "B": 2, "C": 2}, {"A": 1, "B": 1, "C": 2}, {"A": 1, "B": 1, "C": 1}]
