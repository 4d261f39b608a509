import json

import numpy as np
import pytest
from shapely import Point

from handfab import capture as cap
from handfab import synth
from handfab.errors import CalibrationError, SchemaError


def test_scale_matches_synthesized_page(fixture_paths, hand):
    meta = json.load(open(fixture_paths["meta"]))
    assert hand.px_per_mm == pytest.approx(meta["px_per_mm"], rel=0.01)


def test_handedness_and_landmark_frame(hand, cfg):
    assert hand.handedness == "right"
    assert hand.landmarks.shape == (21, 2)
    w, h = cfg.capture.sheet_width_mm, cfg.capture.sheet_height_mm
    assert np.all(hand.landmarks >= 0)
    assert np.all(hand.landmarks[:, 0] <= w)
    assert np.all(hand.landmarks[:, 1] <= h)
    # middle-finger span survives the px->mm round trip
    span = float(np.hypot(*(hand.landmarks[12] - hand.landmarks[0])))
    assert span == pytest.approx(synth.landmarks_array()[12][1]
                                 - synth.landmarks_array()[0][1], abs=2.0)


def test_contour_contains_landmarks(hand):
    poly = hand.contour.to_shapely()
    for pt in hand.landmarks:
        assert poly.buffer(2.0).covers(Point(*pt))


def test_contour_area_plausible(hand):
    # an adult hand print occupies roughly 100-250 cm^2 of the page
    assert 8_000 < hand.contour.to_shapely().area < 28_000


def test_left_hand_capture(left_fixture_paths, cfg):
    hand = cap.capture(left_fixture_paths["image"],
                       left_fixture_paths["landmarks"], cfg.capture)
    assert hand.handedness == "left"
    # thumb tip sits on the +x side of the wrist for a palm-down left hand
    assert hand.landmarks[4][0] > hand.landmarks[0][0]


@pytest.mark.parametrize("mangle, message", [
    (lambda d: d.pop("handedness"), "handedness"),
    (lambda d: d.update(handedness="both"), "handedness"),
    (lambda d: d.update(landmarks=d["landmarks"][:20]), "landmarks"),
    (lambda d: d["landmarks"][3].pop("x"), "landmark 3"),
    (lambda d: d["landmarks"][7].update(x=1.5), "landmark 7"),
    (lambda d: d.update(image_width=0), "image_width"),
])
def test_landmark_schema_errors(tmp_path, fixture_paths, cfg, mangle, message):
    data = json.load(open(fixture_paths["landmarks"]))
    mangle(data)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    with pytest.raises(SchemaError, match=message):
        cap.load_landmarks(str(bad), cfg.capture)


def test_missing_and_malformed_landmark_file(tmp_path, cfg):
    with pytest.raises(SchemaError):
        cap.load_landmarks(str(tmp_path / "nope.json"), cfg.capture)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError, match="malformed"):
        cap.load_landmarks(str(bad), cfg.capture)


def test_blank_page_fails_segmentation(tmp_path, fixture_paths, cfg):
    import cv2

    from handfab.errors import HandfabError

    img = cv2.imread(fixture_paths["image"])
    blank = np.full_like(img, 245)
    path = tmp_path / "blank.png"
    cv2.imwrite(str(path), blank)
    with pytest.raises(HandfabError):
        cap.capture(str(path), fixture_paths["landmarks"], cfg.capture)
