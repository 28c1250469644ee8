import json
import random

import pytest

from drivelab.collab.state import (
    SessionCore,
    SessionState,
    SyncMessage,
    apply_message,
    decode_ledger,
    encode_ledger,
)

DURATION = 60_000


def _msg(msg_kind, origin="a", **payload):
    return SyncMessage(seq=0, kind=msg_kind, origin=origin, payload=payload)


def test_set_playback_lww():
    core = SessionCore(DURATION)
    a1, _ = core.propose(_msg("set_playback", origin="a", t=10_000))
    a2, _ = core.propose(_msg("set_playback", origin="b", t=20_000))
    assert a1.seq == 1 and a2.seq == 2
    assert core.state.playback["t"] == 20_000


def test_playback_clamped_to_duration():
    core = SessionCore(DURATION)
    core.propose(_msg("set_playback", t=999_999_999))
    assert core.state.playback["t"] == DURATION


def test_create_then_delete_annotation():
    core = SessionCore(DURATION)
    applied, rej = core.propose(_msg("create_annotation", id="a1", kind="comment", text="x", author="a"))
    assert rej is None and applied.seq == 1
    applied, rej = core.propose(_msg("delete_annotation", id="a1"))
    assert rej is None
    assert core.state.annotations == {}


def test_stale_delete_rejected_without_seq():
    core = SessionCore(DURATION)
    applied, rej = core.propose(_msg("delete_annotation", id="ghost"))
    assert applied is None
    assert rej.kind == "error" and "unknown annotation" in rej.payload["reason"]
    assert core.state.last_seq == 0  # no seq consumed
    applied, _ = core.propose(_msg("set_playback", t=5))
    assert applied.seq == 1


def test_duplicate_create_rejected():
    core = SessionCore(DURATION)
    core.propose(_msg("create_annotation", id="a1", kind="comment", text="x"))
    applied, rej = core.propose(_msg("create_annotation", id="a1", kind="comment", text="y"))
    assert applied is None and "already exists" in rej.payload["reason"]


def test_update_annotation_lww_by_seq():
    core = SessionCore(DURATION)
    core.propose(_msg("create_annotation", id="a1", kind="comment", text="v0", author="a"))
    core.propose(_msg("update_annotation", origin="b", id="a1", text="v1"))
    core.propose(_msg("update_annotation", origin="c", id="a1", text="v2"))
    ann = core.state.annotations["a1"]
    assert ann.text == "v2"
    assert ann.author == "a"  # authorship survives edits


def test_label_annotation_auto_anchored():
    core = SessionCore(DURATION, anchor_label=lambda t: (float(t) / 1000.0, 0.0, 0.0))
    applied, rej = core.propose(_msg("create_annotation", id="l1", kind="label", text="x", t=5000))
    assert rej is None
    assert core.state.annotations["l1"].position == (5.0, 0.0, 0.0)


def test_ghost_create_select():
    core = SessionCore(DURATION)
    core.propose(_msg("create_ghost", id="g1", t=42_000, camera={"position": [1, 2, 3]}, label="spot"))
    applied, rej = core.propose(_msg("select_ghost", origin="b", id="g1"))
    assert rej is None
    assert applied.kind == "set_playback"
    assert applied.payload["t"] == 42_000
    assert applied.payload["ghost_id"] == "g1"
    assert applied.payload["recommended_camera"] == {"position": [1, 2, 3]}
    assert core.state.playback["t"] == 42_000 and not core.state.playback["playing"]
    # idempotent
    core.propose(_msg("select_ghost", origin="b", id="g1"))
    assert core.state.playback["t"] == 42_000


def test_select_unknown_ghost_rejected():
    core = SessionCore(DURATION)
    applied, rej = core.propose(_msg("select_ghost", id="nope"))
    assert applied is None and "unknown ghost" in rej.payload["reason"]


def test_select_then_set_playback_later_seq_wins():
    core = SessionCore(DURATION)
    core.propose(_msg("create_ghost", id="g1", t=42_000))
    core.propose(_msg("select_ghost", id="g1"))
    core.propose(_msg("set_playback", t=1000))
    assert core.state.playback["t"] == 1000


def test_ghost_outside_duration_rejected():
    core = SessionCore(DURATION)
    applied, rej = core.propose(_msg("create_ghost", id="g1", t=DURATION + 1))
    assert applied is None and "outside" in rej.payload["reason"]


def test_seq_gap_free():
    core = SessionCore(DURATION)
    rng = random.Random(1)
    for i in range(50):
        core.propose(_msg("set_playback", t=rng.randint(0, DURATION)))
        core.propose(_msg("delete_annotation", id="never"))  # always rejected
    assert [m.seq for m in core.ledger] == list(range(1, 51))


def test_ledger_roundtrip_bytes():
    core = SessionCore(DURATION)
    core.propose(_msg("set_playback", t=1))
    core.propose(_msg("create_ghost", id="g", t=2))
    blob = encode_ledger(core.ledger)
    again = decode_ledger(blob)
    assert [m.to_json() for m in again] == [m.to_json() for m in core.ledger]
    assert encode_ledger(again) == blob


def test_ledger_replay_reproduces_state():
    rng = random.Random(2)
    core = SessionCore(DURATION)
    _random_ops(core, rng, 200)
    rebuilt = SessionCore.replay(DURATION, decode_ledger(encode_ledger(core.ledger)))
    assert json.dumps(rebuilt.state.to_json(), sort_keys=True) == json.dumps(core.state.to_json(), sort_keys=True)


def test_presence_decay_with_injected_clock():
    core = SessionCore(DURATION)
    core.propose(_msg("presence", origin="ana", display_name="Ana", view="vr"), now_ms=1_000)
    snap_soon = core.snapshot_message(now_ms=5_000)
    assert "ana" in snap_soon.payload["state"]["presences"]
    snap_late = core.snapshot_message(now_ms=11_001)
    assert "ana" not in snap_late.payload["state"]["presences"]
    # presence itself is still in the materialized state, only snapshots decay
    assert "ana" in core.state.presences


def _random_ops(core, rng, n, origins=("a", "b")):
    created_ann, created_ghost = [], []
    for i in range(n):
        origin = rng.choice(origins)
        roll = rng.random()
        if roll < 0.25:
            core.propose(_msg("set_playback", origin=origin, t=rng.randint(-5000, DURATION + 5000),
                              rate=rng.choice([1.0, 2.0, -1.0]), playing=rng.random() < 0.5))
        elif roll < 0.4:
            ann_id = f"ann-{i}" if rng.random() < 0.8 else (rng.choice(created_ann) if created_ann else "dup")
            applied, _ = core.propose(
                _msg("create_annotation", origin=origin, id=ann_id, kind=rng.choice(["label", "comment"]),
                     text=f"t{i}", t=rng.randint(0, DURATION), position=[1.0, 2.0, 3.0], author=origin)
            )
            if applied is not None:
                created_ann.append(ann_id)
        elif roll < 0.5 and created_ann:
            core.propose(_msg("update_annotation", origin=origin, id=rng.choice(created_ann), text=f"edit{i}"))
        elif roll < 0.6:
            target = rng.choice(created_ann) if created_ann and rng.random() < 0.7 else f"missing-{i}"
            applied, _ = core.propose(_msg("delete_annotation", origin=origin, id=target))
            if applied is not None:
                created_ann.remove(target)
        elif roll < 0.7:
            core.propose(_msg("set_visibility", origin=origin, **{rng.choice(["avatars", "heatmap:gaze", "events"]): rng.random() < 0.5}))
        elif roll < 0.85:
            gid = f"g-{i}"
            applied, _ = core.propose(_msg("create_ghost", origin=origin, id=gid, t=rng.randint(0, DURATION),
                                           camera={"position": [rng.random(), 0.0, 1.0]}, label=f"spot {i}"))
            if applied is not None:
                created_ghost.append(gid)
        elif created_ghost:
            core.propose(_msg("select_ghost", origin=origin, id=rng.choice(created_ghost)))
        else:
            core.propose(_msg("presence", origin=origin, display_name=origin.upper(),
                              pose={"position": [rng.random(), 0.0, 1.6]}), now_ms=i)


def test_two_client_convergence_over_random_interleavings():
    rng = random.Random(99)
    for schedule in range(50):
        server = SessionCore(DURATION)
        _random_ops(server, rng, 100)
        applied = list(server.ledger)
        assert [m.seq for m in applied] == list(range(1, len(applied) + 1))

        inbox_a = list(applied)
        inbox_b = list(applied)
        state_a, state_b = SessionState(), SessionState()
        # arbitrary interleaving, in-order per connection
        while inbox_a or inbox_b:
            pick_a = inbox_a and (not inbox_b or rng.random() < 0.5)
            if pick_a:
                apply_message(state_a, inbox_a.pop(0))
            else:
                apply_message(state_b, inbox_b.pop(0))

        sa = json.dumps(state_a.to_json(), sort_keys=True)
        sb = json.dumps(state_b.to_json(), sort_keys=True)
        ss = json.dumps(server.state.to_json(), sort_keys=True)
        assert sa == sb == ss
