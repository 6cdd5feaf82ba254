"""Circuit <-> image codec.

Each gate is one pixel: rows are qubits, columns come from
``layout_columns``. Images are resized to 28x28 by nearest neighbour so
palette values survive exactly, then mapped affinely onto [-1, 1].
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, layout_columns
from .errors import EmptyCircuit, EmptyDecode, ParseError, TooLarge, ValidationError

SIZE = 28
PALETTE = {"Rz": 40, "H": 80, "Hy": 100, "CX": 255}
PALETTE_CENTERS = np.array([0, 40, 80, 100, 255], dtype=float)

# Half-open [lo, hi); the last interval is closed at 255.
DECODE_TABLE = (
    (0, 30, None),
    (30, 50, "Rz"),
    (50, 70, None),
    (70, 90, "H"),
    (90, 120, "Hy"),
    (120, 160, None),
    (160, 256, "CX"),
)
_KIND_CODES = (None, "Rz", "H", "Hy", "CX")
_LUT = np.zeros(256, dtype=np.int8)
for _lo, _hi, _kind in DECODE_TABLE:
    _LUT[_lo:_hi] = _KIND_CODES.index(_kind)

WIDTH_CANDIDATES = tuple(range(1, SIZE, 2))
# Widths whose score is within this relative band of the best count as tied.
WIDTH_TIE_BAND = 0.05

CONTAINER_MAGIC = b"QCIM"
CONTAINER_VERSION = 1
PALETTE_VERSION = 1


@dataclass
class GateImage:
    pixels: np.ndarray  # uint8, (n_qubits, n_columns)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def encode_circuit(circuit):
    if not circuit.gates:
        raise EmptyCircuit("cannot encode an empty circuit")
    layout = layout_columns(circuit)
    pixels = np.zeros((circuit.n_qubits, len(layout)), dtype=np.uint8)
    for col, gates in enumerate(layout.columns):
        for g in gates:
            for q in g.qubits:
                pixels[q, col] = PALETTE[g.kind]
    return GateImage(pixels)


def _index_map(src_len, dst_len):
    return np.floor((np.arange(dst_len) + 0.5) * src_len / dst_len).astype(np.intp)


def resize_nearest(arr, height, width):
    arr = np.asarray(arr)
    rows = _index_map(arr.shape[0], height)
    cols = _index_map(arr.shape[1], width)
    return arr[np.ix_(rows, cols)]


def normalize_to_28(image):
    pixels = image.pixels if isinstance(image, GateImage) else np.asarray(image)
    if pixels.shape[0] > SIZE or pixels.shape[1] > SIZE:
        raise TooLarge(f"image {pixels.shape} exceeds {SIZE}x{SIZE}")
    return resize_nearest(pixels, SIZE, SIZE).astype(float) / 127.5 - 1.0


def unnormalize(img):
    """Clamp to [-1, 1] and map back to integer pixels in [0, 255]."""
    x = np.clip(np.asarray(img, dtype=float), -1.0, 1.0)
    return np.clip(np.round((x + 1.0) * 127.5), 0, 255).astype(np.uint8)


def quantize_pixel(v):
    """Gate kind for a pixel value, ``None`` for background."""
    return _KIND_CODES[_LUT[int(v)]]


def quantize_array(pixels):
    """Vectorised ``quantize_pixel``; returns indices into ``_KIND_CODES``."""
    return _LUT[np.asarray(pixels, dtype=np.uint8)]


def _snap(values):
    dist = np.abs(values[..., None] - PALETTE_CENTERS)
    return PALETTE_CENTERS[np.argmin(dist, axis=-1)]


def width_scores(img, n_qubits):
    """Reconstruction error for each candidate width.

    The image is reduced to ``n_qubits x W``, each pixel snapped to its
    nearest palette centre, re-expanded to 28x28 and compared with the input.
    """
    full = unnormalize(img).astype(float)
    scores = {}
    for w in WIDTH_CANDIDATES:
        small = _snap(resize_nearest(full, n_qubits, w))
        scores[w] = float(np.abs(resize_nearest(small, SIZE, SIZE) - full).sum())
    return scores


def black_fraction_width(img):
    """Width implied by the fraction of black pixels per row.

    Non-identity layer count L ~ (1 - mean black fraction) * 28 / 2,
    width 2L + 1, clipped to the candidate range.
    """
    full = unnormalize(img)
    black = (quantize_array(full) == 0).mean(axis=1).mean()
    layers = int(round((1.0 - black) * SIZE / 2))
    return int(np.clip(2 * layers + 1, WIDTH_CANDIDATES[0], WIDTH_CANDIDATES[-1]))


def estimate_width(img, n_qubits):
    if not 2 <= n_qubits <= SIZE:
        raise ValidationError(f"n_qubits must be in [2, {SIZE}]")
    scores = width_scores(img, n_qubits)
    best = min(scores.values())
    tied = [w for w, s in scores.items() if s <= best * (1.0 + WIDTH_TIE_BAND) + 1e-9]
    return min(tied)


def decode_image(img, n_qubits):
    """Decode a normalized 28x28 image into a circuit.

    CX pixels in a column pair top-down (control above target); an unpaired
    one is dropped. Rz gates get fresh parameter indices in gate order.
    Raises ``EmptyDecode`` when nothing survives.
    """
    img = np.asarray(img, dtype=float)
    if img.shape != (SIZE, SIZE):
        raise ValidationError(f"expected {SIZE}x{SIZE} image, got {img.shape}")
    width = estimate_width(img, n_qubits)
    codes = quantize_array(resize_nearest(unnormalize(img), n_qubits, width))
    columns = []
    n_params = 0
    for col in range(width):
        gates = []
        columns.append(gates)
        column = codes[:, col]
        cx_rows = [q for q in range(n_qubits) if _KIND_CODES[column[q]] == "CX"]
        pairs = {cx_rows[i]: cx_rows[i + 1] for i in range(0, len(cx_rows) - 1, 2)}
        for q in range(n_qubits):
            kind = _KIND_CODES[column[q]]
            if kind is None:
                continue
            if kind == "CX":
                if q in pairs:
                    gates.append(Gate("CX", (q, pairs[q])))
            elif kind == "Rz":
                gates.append(Gate("Rz", (q,), n_params))
                n_params += 1
            else:
                gates.append(Gate(kind, (q,)))
    if not any(columns):
        raise EmptyDecode("image decodes to zero gates")
    return Circuit.from_columns(n_qubits, columns)


def write_images(path, images, sidecar=None):
    """Write uint8 images (count, height, width) to a QCIM container."""
    images = np.asarray(images)
    if images.dtype != np.uint8:
        raise ValidationError("container stores uint8 pixels")
    if images.ndim != 3:
        raise ValidationError("expected (count, height, width) array")
    count, height, width = images.shape
    if height > 255 or width > 255:
        raise ValidationError("image dimensions must fit in one byte")
    with open(path, "wb") as f:
        f.write(CONTAINER_MAGIC)
        f.write(struct.pack("<HIBB", CONTAINER_VERSION, count, height, width))
        f.write(np.ascontiguousarray(images).tobytes())
    if sidecar is not None:
        with open(str(path) + ".json", "w", encoding="utf-8") as f:
            json.dump({"n_qubits": sidecar["n_qubits"], "seed": sidecar["seed"],
                       "palette_version": PALETTE_VERSION}, f)
            f.write("\n")


def read_images(path):
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 12 or data[:4] != CONTAINER_MAGIC:
        raise ParseError(f"{path}: not a QCIM container")
    version, count, height, width = struct.unpack("<HIBB", data[4:12])
    if version != CONTAINER_VERSION:
        raise ParseError(f"{path}: unsupported container version {version}")
    body = data[12:]
    if len(body) != count * height * width:
        raise ParseError(f"{path}: expected {count * height * width} pixel bytes, got {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(count, height, width).copy()


def read_sidecar(path):
    with open(str(path) + ".json", encoding="utf-8") as f:
        return json.load(f)
