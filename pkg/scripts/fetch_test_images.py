"""Export the scikit-image sample photographs as PGM files.

Writes camera.pgm, moon.pgm, and coins.pgm into data/ (created if
missing). scikit-image ships these images inside the wheel, so no
network access is needed. Pass --crop to additionally write 216x216
crops that tile exactly into 36x36 patches.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from gtvdenoise import ImageBuffer, save_image

# crop windows chosen to cover the textured region of each photograph
CROPS = {
    "camera": (150, 150),
    "moon": (100, 100),
    "coins": (20, 60),
}
CROP_SIZE = 216


def load_samples():
    from skimage import data

    return {
        "camera": data.camera(),
        "moon": data.moon(),
        "coins": data.coins(),
    }


def to_buffer(arr):
    return ImageBuffer(arr.astype(np.float64)[:, :, None] / 255.0)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("data"))
    parser.add_argument("--crop", action="store_true",
                        help="also write 216x216 crops as <name>_crop.pgm")
    args = parser.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, arr in load_samples().items():
        path = args.out_dir / f"{name}.pgm"
        save_image(to_buffer(arr), path)
        print(f"wrote {path} ({arr.shape[0]}x{arr.shape[1]})")
        if args.crop:
            r, c = CROPS[name]
            crop = arr[r:r + CROP_SIZE, c:c + CROP_SIZE]
            crop_path = args.out_dir / f"{name}_crop.pgm"
            save_image(to_buffer(crop), crop_path)
            print(f"wrote {crop_path} ({CROP_SIZE}x{CROP_SIZE})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
