import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

LOG_HEADER = ["TIME", "FPOGX", "FPOGY", "FPOGD", "FPOGID", "FPOGV", "MEDIA_NAME"]


@dataclass
class ToyCorpus:
    root: Path
    log_dir: Path
    images_dir: Path
    seg_dir: Path
    manifest: Path
    image_ids: tuple[str, ...]
    viewer_ids: tuple[str, ...]


def _synthetic_image(rng, width, height):
    img = np.full((height, width, 3), 230, dtype=np.uint8)
    # a dark text-ish bar and a colored block give the conspicuity model
    # something to find
    img[10:20, 10 : width - 10] = (40, 40, 40)
    x0 = int(width * 0.55)
    img[height // 2 : height // 2 + 24, x0 : x0 + 32] = (
        rng.randint(120, 255),
        rng.randint(0, 120),
        rng.randint(0, 120),
    )
    # footer gradient keeps the corpus well past 16 distinct colors
    ramp = np.linspace(0, 255, width, dtype=np.uint8)
    img[height - 8 :, :, 0] = ramp[None, :]
    img[height - 8 :, :, 1] = ramp[None, ::-1]
    img[height - 8 :, :, 2] = 128
    return img


def _viewer_log(path, rng, image_ids):
    rows = []
    t = 0.0
    for image_id in image_ids:
        fid = 0
        t = round(t, 2)
        for _ in range(rng.randint(6, 10)):
            fid += 1
            x = round(float(np.clip(rng.normal(0.35, 0.2), 0.02, 0.98)), 4)
            y = round(float(np.clip(rng.normal(0.35, 0.2), 0.02, 0.98)), 4)
            duration = 0.0
            for _ in range(rng.randint(1, 3)):
                duration = round(duration + 0.1, 2)
                rows.append([round(t, 2), x, y, duration, fid, 1, image_id])
                t += 0.35
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_HEADER)
        writer.writerows(rows)


@pytest.fixture
def toy_corpus(tmp_path):
    """Small end-to-end corpus: 3 images, 2 viewer logs, manifest and
    segmentation. Image aspect matches the 1920 x 1200 display so the
    letterbox transform is the identity."""
    rng = np.random.RandomState(1234)
    image_ids = ("imgA", "imgB", "imgC")
    ui_types = ("webpage", "mobile", "poster")
    viewer_ids = ("p01", "p02")
    width, height = 192, 120

    images_dir = tmp_path / "images"
    images_dir.mkdir()
    for image_id in image_ids:
        Image.fromarray(_synthetic_image(rng, width, height)).save(
            images_dir / f"{image_id}.png"
        )

    manifest = tmp_path / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "ui_type", "width", "height", "block_id"])
        for image_id, ui_type in zip(image_ids, ui_types):
            writer.writerow([image_id, ui_type, width, height, "b1"])

    log_dir = tmp_path / "logs"
    log_dir.mkdir()
    for viewer_id in viewer_ids:
        _viewer_log(log_dir / f"{viewer_id}.csv", rng, image_ids)

    seg_dir = tmp_path / "segs"
    seg_dir.mkdir()
    for image_id in image_ids:
        elements = [
            {"category": "text", "x0": 10, "y0": 10, "x1": width - 10, "y1": 20},
            {"category": "image", "x0": 100, "y0": 60, "x1": 140, "y1": 90},
            {"category": "face", "x0": 30, "y0": 60, "x1": 60, "y1": 100},
        ]
        (seg_dir / f"{image_id}.json").write_text(json.dumps({"elements": elements}))

    return ToyCorpus(
        root=tmp_path,
        log_dir=log_dir,
        images_dir=images_dir,
        seg_dir=seg_dir,
        manifest=manifest,
        image_ids=image_ids,
        viewer_ids=viewer_ids,
    )
