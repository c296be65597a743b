"""
Test cases for the CSV table store.
"""
import numpy as np
import pandas as pd
import pytest

from src.core import ConfigError, IdMismatch, IoError, MissingData
from src.spatial.weights import from_edge_list
from src.storage import CsvTableStore


@pytest.fixture
def store():
    return CsvTableStore()


@pytest.mark.unit
class TestReadDataset:
    """Test loading outcome and covariates."""

    def test_reads_selected_columns(self, store, write_csv):
        # Arrange
        path = write_csv("data.csv", pd.DataFrame({
            "id": ["07", "08", "09"], "y": [1.0, 2.0, 3.0], "a": [1, 2, 4], "b": [0.5, 0.1, 0.2], "c": [9, 9, 9],
        }))

        # Act
        data = store.read_dataset(path, "y", ["b", "a"], id_column="id")

        # Assert
        assert data.ids == ["07", "08", "09"]
        assert data.names == ["b", "a"]
        np.testing.assert_array_equal(data.X[:, 1], [1.0, 2.0, 4.0])
        assert data.outcome == "y"

    def test_row_numbers_without_id_column(self, store, write_csv):
        # Arrange
        path = write_csv("data.csv", pd.DataFrame({"y": [1.0, 2.0], "x": [3.0, 4.0]}))

        # Act
        data = store.read_dataset(path, "y", ["x"])

        # Assert
        assert data.ids == ["0", "1"]

    def test_outcome_only(self, store, write_csv):
        # Arrange
        path = write_csv("data.csv", pd.DataFrame({"y": [1.0, 2.0, 5.0]}))

        # Act
        data = store.read_dataset(path, "y", [])

        # Assert
        assert data.X.shape == (3, 0)

    def test_absent_column(self, store, write_csv):
        # Arrange
        path = write_csv("data.csv", pd.DataFrame({"y": [1.0], "x": [2.0]}))

        # Act / Assert
        with pytest.raises(ConfigError) as exc_info:
            store.read_dataset(path, "price", ["x"])
        assert exc_info.value.details["missing"] == ["price"]

    def test_non_numeric_column(self, store, write_csv):
        path = write_csv("data.csv", pd.DataFrame({"y": [1.0, 2.0], "x": ["low", "high"]}))
        with pytest.raises(ConfigError):
            store.read_dataset(path, "y", ["x"])

    def test_missing_values_reported_by_row(self, store, write_csv):
        # Arrange
        path = write_csv("data.csv", pd.DataFrame({"y": [1.0, None, 3.0], "x": [1.0, 2.0, None]}))

        # Act / Assert
        with pytest.raises(MissingData) as exc_info:
            store.read_dataset(path, "y", ["x"])
        assert exc_info.value.details["rows"] == [1, 2]
        assert exc_info.value.details["columns"] == ["y", "x"]

    def test_duplicate_ids(self, store, write_csv):
        path = write_csv("data.csv", pd.DataFrame({"id": ["a", "a"], "y": [1.0, 2.0], "x": [1.0, 2.0]}))
        with pytest.raises(IdMismatch):
            store.read_dataset(path, "y", ["x"], id_column="id")

    def test_missing_file(self, store, tmp_path):
        with pytest.raises(IoError):
            store.read_dataset(tmp_path / "absent.csv", "y", ["x"])


@pytest.mark.unit
class TestEdgeFiles:
    """Test edge list, coordinate and unit files."""

    def test_blank_weight_means_one(self, store, tmp_path):
        # Arrange
        path = tmp_path / "edges.csv"
        path.write_text("src,dst,weight\n1,2,\n2,3,0.5\n")

        # Act
        edges = store.read_edges(path)

        # Assert
        assert edges == [("1", "2", 1.0), ("2", "3", 0.5)]

    def test_without_weight_column(self, store, tmp_path):
        # Arrange
        path = tmp_path / "edges.csv"
        path.write_text("src,dst\n01,02\n")

        # Act
        edges = store.read_edges(path)

        # Assert
        assert edges == [("01", "02", 1.0)]

    def test_header_only(self, store, tmp_path):
        # Arrange
        path = tmp_path / "edges.csv"
        path.write_text("src,dst,weight\n")

        # Act / Assert
        assert store.read_edges(path) == []

    def test_wrong_header(self, store, tmp_path):
        path = tmp_path / "edges.csv"
        path.write_text("from,to\n1,2\n")
        with pytest.raises(ConfigError):
            store.read_edges(path)

    def test_written_edges_read_back(self, store, tmp_path, worked_row):
        # Arrange
        path = tmp_path / "w.csv"

        # Act
        text = store.write_edges(worked_row, path)
        rebuilt = from_edge_list(store.read_edges(path), ids=worked_row.ids)

        # Assert
        assert text.splitlines()[0] == "src,dst,weight"
        np.testing.assert_allclose(rebuilt.to_dense(), worked_row.to_dense())

    def test_coordinates(self, store, tmp_path):
        # Arrange
        path = tmp_path / "coords.csv"
        path.write_text("id,x,y\na,0,0\nb,3,4\n")

        # Act
        ids, coords = store.read_coords(path)

        # Assert
        assert ids == ["a", "b"]
        assert coords.tolist() == [[0.0, 0.0], [3.0, 4.0]]

    def test_duplicate_coordinate_ids(self, store, tmp_path):
        path = tmp_path / "coords.csv"
        path.write_text("id,x,y\na,0,0\na,3,4\n")
        with pytest.raises(IdMismatch):
            store.read_coords(path)

    def test_units(self, store, tmp_path):
        # Arrange
        path = tmp_path / "units.csv"
        path.write_text("id\n3\n1\n2\n")

        # Act / Assert
        assert store.read_units(path) == ["3", "1", "2"]

    def test_dataset_written_with_ids_first(self, store, worked_dataset):
        # Act
        text = store.write_dataset(worked_dataset)

        # Assert
        assert text.splitlines()[0] == "id,y,x1,x2"
        assert text.splitlines()[1].startswith("1,5.0,")
