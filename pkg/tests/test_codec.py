import numpy as np
import pytest

from diffansatz import rng as rngmod
from diffansatz.circuit import Circuit, parse_pauli_string
from diffansatz.codec import (PALETTE, WIDTH_CANDIDATES, GateImage, decode_image, encode_circuit,
                              estimate_width, normalize_to_28, quantize_pixel, read_images,
                              read_sidecar, resize_nearest, unnormalize, write_images)
from diffansatz.errors import EmptyCircuit, EmptyDecode, ParseError, TooLarge
from diffansatz.ucc import DatasetSpec, build_ucc_block, generate_corpus, sample_pauli_string


def ucc(letters):
    return build_ucc_block(parse_pauli_string(letters), 0)


def roundtrip(c):
    return decode_image(normalize_to_28(encode_circuit(c)), c.n_qubits)


class TestEncode:
    def test_xz(self):
        px = encode_circuit(ucc("XZ")).pixels
        np.testing.assert_array_equal(px, [[80, 255, 0, 255, 80], [0, 255, 40, 255, 0]])

    def test_zz(self):
        px = encode_circuit(ucc("ZZ")).pixels
        np.testing.assert_array_equal(px, [[255, 0, 255], [255, 40, 255]])

    def test_hy_palette(self):
        assert encode_circuit(ucc("YI")).pixels[0, 0] == 100

    def test_empty(self):
        with pytest.raises(EmptyCircuit):
            encode_circuit(Circuit(2, ()))


class TestNormalize:
    def test_endpoints(self):
        img = np.zeros((28, 28), dtype=np.uint8)
        img[0, 0] = 255
        x = normalize_to_28(GateImage(img))
        assert x[0, 0] == 1.0 and x[1, 1] == -1.0

    def test_blocks_map_back(self):
        px = encode_circuit(ucc("XZ")).pixels
        big = resize_nearest(px, 28, 28)
        np.testing.assert_array_equal(resize_nearest(big, 2, 5), px)
        # each source pixel covers a contiguous block
        assert (big[:14, :6] == 80).all() and (big[14:, 11:17] == 40).all()

    def test_too_large(self):
        with pytest.raises(TooLarge):
            normalize_to_28(GateImage(np.zeros((2, 29), dtype=np.uint8)))

    def test_unnormalize_clamps(self):
        np.testing.assert_array_equal(unnormalize(np.array([-3.0, -1.0, 0.0, 1.0, 7.0])),
                                      [0, 0, 128, 255, 255])


class TestQuantize:
    @pytest.mark.parametrize("v,kind", [(35, "Rz"), (60, None), (200, "CX"), (0, None), (29, None),
                                        (30, "Rz"), (50, None), (70, "H"), (89, "H"), (90, "Hy"),
                                        (119, "Hy"), (120, None), (159, None), (160, "CX"),
                                        (255, "CX")])
    def test_table(self, v, kind):
        assert quantize_pixel(v) == kind

    def test_palette_sound(self):
        for kind, v in PALETTE.items():
            assert quantize_pixel(v) == kind
        assert quantize_pixel(0) is None


class TestWidth:
    def test_xz(self):
        assert estimate_width(normalize_to_28(encode_circuit(ucc("XZ"))), 2) == 5

    def test_xxyz(self):
        assert estimate_width(normalize_to_28(encode_circuit(ucc("XXYZ"))), 4) == 9

    def test_black_image(self):
        img = -np.ones((28, 28))
        assert estimate_width(img, 2) == WIDTH_CANDIDATES[0]
        with pytest.raises(EmptyDecode):
            decode_image(img, 2)


class TestDecode:
    @pytest.mark.parametrize("letters", ["XZ", "ZZ", "XXYZ", "IZ", "YIIXZ", "ZIIIIIIIIIIY"])
    def test_roundtrip_examples(self, letters):
        c = ucc(letters)
        assert roundtrip(c) == c

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 12])
    def test_roundtrip_random_blocks(self, n):
        rng = rngmod.stream(11, "codec", n)
        for _ in range(300):
            c = build_ucc_block(sample_pauli_string(n, rng))
            assert roundtrip(c) == c

    def test_lone_cx_dropped(self):
        px = np.array([[255, 80, 0], [0, 0, 40]], dtype=np.uint8)
        c = decode_image(normalize_to_28(GateImage(px)), 2)
        assert [(g.kind, g.qubits) for g in c.gates] == [("H", (0,)), ("Rz", (1,))]

    def test_rz_fresh_indices(self):
        px = np.array([[40, 80, 40], [40, 0, 0]], dtype=np.uint8)
        c = decode_image(normalize_to_28(GateImage(px)), 2)
        assert [g.param_index for g in c.gates if g.kind == "Rz"] == [0, 1, 2]
        assert c.n_params == 3

    def test_no_parameters_is_not_error(self):
        px = np.array([[80, 255, 80], [0, 255, 0]], dtype=np.uint8)
        c = decode_image(normalize_to_28(GateImage(px)), 2)
        assert c.n_params == 0 and len(c.gates) == 3

    def test_noise_inside_dead_zones(self):
        # ±9.4 grey levels: ±10 lands exactly on interval boundaries (80+10 = 90 is Hy)
        rng = np.random.default_rng(0)
        corpus = generate_corpus(DatasetSpec(4, 500, 2))
        for c in corpus:
            x = normalize_to_28(encode_circuit(c))
            x = x + rng.uniform(-9.4, 9.4, x.shape) / 127.5
            assert decode_image(x, 4) == c

    def test_totality_on_noise(self):
        rng = np.random.default_rng(1)
        for i in range(10_000):
            n = 2 + i % 5
            img = rng.uniform(-1, 1, (28, 28))
            try:
                c = decode_image(img, n)
            except EmptyDecode:
                continue
            assert c.n_qubits == n
            for g in c.gates:
                assert max(g.qubits) < n


class TestContainer:
    def test_roundtrip(self, tmp_path):
        imgs = np.random.default_rng(0).integers(0, 256, (3, 28, 28), dtype=np.uint8)
        path = tmp_path / "x.qcim"
        write_images(path, imgs, sidecar={"n_qubits": 2, "seed": 9})
        np.testing.assert_array_equal(read_images(path), imgs)
        assert read_sidecar(path) == {"n_qubits": 2, "seed": 9, "palette_version": 1}
        raw = path.read_bytes()
        assert raw[:4] == b"QCIM" and raw[4:6] == b"\x01\x00" and raw[6:10] == b"\x03\x00\x00\x00"
        assert len(raw) == 12 + 3 * 28 * 28

    def test_corrupt(self, tmp_path):
        path = tmp_path / "bad.qcim"
        path.write_bytes(b"QCIM\x01\x00\x02\x00\x00\x00\x1c\x1c" + bytes(10))
        with pytest.raises(ParseError):
            read_images(path)
        path.write_bytes(b"NOPE")
        with pytest.raises(ParseError):
            read_images(path)
