"""
Unit tests para datasets (IDX, sintéticos y CSV).
"""

import os
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.dataset import (
    IDX_IMAGES_MAGIC,
    IDX_LABELS_MAGIC,
    Sample,
    SynthRule,
    binarize,
    downsample,
    ingest_idx,
    label_for,
    read_idx,
    read_samples_csv,
    synth_dataset,
    write_samples_csv,
)
from app.core.exceptions import DatasetError

MNIST_DIR = Path(os.environ.get("HYBRIDZX_MNIST_DIR", "data/mnist"))
T10K_IMAGES = MNIST_DIR / "t10k-images-idx3-ubyte"
T10K_LABELS = MNIST_DIR / "t10k-labels-idx1-ubyte"


def idx_bytes(magic: int, array: np.ndarray) -> bytes:
    """Serializa un array uint8 en formato IDX."""
    header = magic.to_bytes(4, "big")
    for d in array.shape:
        header += int(d).to_bytes(4, "big")
    return header + array.astype(np.uint8).tobytes()


@pytest.fixture
def idx_files(tmp_path):
    """Cuatro imágenes 4x4: dos '3' (mitad superior blanca) y dos '6' (mitad inferior)."""
    top = np.zeros((4, 4), dtype=np.uint8)
    top[:2] = 255
    bottom = np.zeros((4, 4), dtype=np.uint8)
    bottom[2:] = 255
    images = np.stack([top, bottom, np.full((4, 4), 100, dtype=np.uint8), top, bottom])
    labels = np.array([3, 6, 1, 3, 6], dtype=np.uint8)
    images_path = tmp_path / "images.idx3-ubyte"
    labels_path = tmp_path / "labels.idx1-ubyte"
    images_path.write_bytes(idx_bytes(IDX_IMAGES_MAGIC, images))
    labels_path.write_bytes(idx_bytes(IDX_LABELS_MAGIC, labels))
    return images_path, labels_path


class TestSample:
    """Tests para Sample."""

    def test_valid(self):
        s = Sample(bits=(0, 1, 1), label=-1)
        assert s.k == 3

    @pytest.mark.parametrize("bits,label", [((0, 2), 1), ((0, 1), 0), ((), 1)])
    def test_invalid(self, bits, label):
        with pytest.raises(ValidationError):
            Sample(bits=bits, label=label)


class TestIdx:
    """Tests para lectura e ingesta IDX."""

    def test_read(self, idx_files):
        magic, images = read_idx(idx_files[0])
        assert magic == IDX_IMAGES_MAGIC
        assert images.shape == (5, 4, 4)

    def test_ingest(self, idx_files):
        """Test filtrado a dos clases, downsampling 2x2 y binarización."""
        samples = ingest_idx(*idx_files, classes=(3, 6), side=2)
        assert [s.label for s in samples] == [1, -1, 1, -1]
        assert samples[0].bits == (1, 1, 0, 0)
        assert samples[1].bits == (0, 0, 1, 1)

    def test_limit(self, idx_files):
        assert len(ingest_idx(*idx_files, limit=3)) == 3

    def test_swapped_files(self, idx_files):
        """Test que el magic se verifica por archivo."""
        with pytest.raises(DatasetError, match="magic"):
            ingest_idx(idx_files[1], idx_files[0])

    def test_missing_class(self, idx_files):
        with pytest.raises(DatasetError, match="ausente"):
            ingest_idx(*idx_files, classes=(3, 8))

    def test_same_classes(self, idx_files):
        with pytest.raises(DatasetError):
            ingest_idx(*idx_files, classes=(3, 3))

    def test_truncated(self, tmp_path):
        """Test archivo con menos bytes que los declarados."""
        path = tmp_path / "bad.idx"
        path.write_bytes(idx_bytes(IDX_LABELS_MAGIC, np.arange(10, dtype=np.uint8))[:-3])
        with pytest.raises(DatasetError, match="truncado"):
            read_idx(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.idx"
        path.write_bytes(b"\x01\x02\x08\x01\x00\x00\x00\x00")
        with pytest.raises(DatasetError, match="magic"):
            read_idx(path)

    def test_unsupported_type(self, tmp_path):
        path = tmp_path / "float.idx"
        path.write_bytes(b"\x00\x00\x0d\x01\x00\x00\x00\x00")
        with pytest.raises(DatasetError, match="no soportado"):
            read_idx(path)

    def test_single_block_28x28(self, tmp_path):
        """Test que un bloque de 255 dentro de una celda 14x14 prende solo ese bit."""
        image = np.zeros((28, 28), dtype=np.uint8)
        image[2:12, 16:26] = 255  # 100/196 ≈ 0.51 de la celda superior derecha
        images = np.stack([image, np.zeros((28, 28), dtype=np.uint8)])
        labels = np.array([3, 6], dtype=np.uint8)
        images_path = tmp_path / "block.idx3-ubyte"
        labels_path = tmp_path / "block.idx1-ubyte"
        images_path.write_bytes(idx_bytes(IDX_IMAGES_MAGIC, images))
        labels_path.write_bytes(idx_bytes(IDX_LABELS_MAGIC, labels))

        samples = ingest_idx(images_path, labels_path, side=2, threshold=0.3)
        assert [(s.bits, s.label) for s in samples] == [((0, 1, 0, 0), 1), ((0, 0, 0, 0), -1)]
        assert ingest_idx(images_path, labels_path, side=2, threshold=0.6)[0].bits == (0, 0, 0, 0)

    @pytest.mark.skipif(
        not (T10K_IMAGES.exists() and T10K_LABELS.exists()),
        reason="archivos MNIST t10k ausentes (HYBRIDZX_MNIST_DIR)"
    )
    def test_mnist_t10k(self):
        """Test ingesta del archivo de test MNIST: solo las dos clases, 4 bits."""
        _, labels = read_idx(T10K_LABELS)
        assert labels.shape == (10000,)
        samples = ingest_idx(T10K_IMAGES, T10K_LABELS, classes=(3, 6), side=2)
        assert len(samples) == int(np.sum((labels == 3) | (labels == 6)))
        assert sum(s.label == 1 for s in samples) == int(np.sum(labels == 3))
        assert all(len(s.bits) == 4 for s in samples)

    def test_downsample(self):
        """Test promedio por bloques."""
        image = np.arange(16, dtype=float).reshape(4, 4)
        assert np.allclose(downsample(image, 2), [[2.5, 4.5], [10.5, 12.5]])
        with pytest.raises(DatasetError):
            downsample(image, 3)

    def test_binarize(self):
        assert binarize(np.array([[0, 127], [128, 255]]), 0.5) == (0, 0, 1, 1)


class TestSynth:
    """Tests para datasets sintéticos."""

    @pytest.mark.parametrize("rule,bits,label", [
        (SynthRule.SINGLE_BIT, (1, 0, 0), 1),
        (SynthRule.SINGLE_BIT, (0, 1, 1), -1),
        (SynthRule.PARITY, (1, 1, 0), 1),
        (SynthRule.PARITY, (1, 0, 0), -1),
        (SynthRule.THRESHOLD, (1, 1, 0, 0), 1),
        (SynthRule.THRESHOLD, (1, 0, 0, 0), -1),
    ])
    def test_rules(self, rule, bits, label):
        assert label_for(bits, rule) == label

    def test_deterministic(self):
        """Test mismo seed → mismo dataset."""
        assert synth_dataset(4, "parity", 20, seed=5) == synth_dataset(4, "parity", 20, seed=5)
        assert synth_dataset(4, "parity", 20, seed=5) != synth_dataset(4, "parity", 20, seed=6)

    def test_labels_follow_rule(self, single_bit_samples):
        assert all(s.label == (1 if s.bits[0] else -1) for s in single_bit_samples)
        assert len(single_bit_samples) == 16

    @pytest.mark.parametrize("k,rule,n", [(0, "parity", 4), (9, "parity", 4), (3, "parity", 0), (3, "xor", 4)])
    def test_invalid(self, k, rule, n):
        with pytest.raises(DatasetError):
            synth_dataset(k, rule, n)


class TestCsv:
    """Tests para CSV de muestras."""

    def test_write_read(self, tmp_path, hand_samples):
        path = tmp_path / "samples.csv"
        write_samples_csv(hand_samples, path)
        text = path.read_text()
        assert text.startswith("# b0,b1,label")
        assert read_samples_csv(path) == hand_samples

    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        write_samples_csv([Sample(bits=(1,), label=1)], path)
        assert read_samples_csv(path) == [Sample(bits=(1,), label=1)]

    def test_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# b0,label\n")
        with pytest.raises(DatasetError):
            read_samples_csv(path)

    def test_invalid_label(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,1,2\n")
        with pytest.raises(DatasetError):
            read_samples_csv(path)

    def test_mixed_widths(self):
        with pytest.raises(DatasetError):
            write_samples_csv([Sample(bits=(1,), label=1), Sample(bits=(1, 0), label=1)], "unused.csv")
