#pragma once

#include <filesystem>
#include <optional>

#include "dbro/objective.hpp"

namespace dbro {

/// Reads an IDX3 image file (magic 0x00000803); pixels scaled to [0, 1].
/// At most `limit` images are read when limit > 0.
Matrix read_idx_images(const std::filesystem::path& path, std::size_t limit = 0);

/// Reads an IDX1 label file (magic 0x00000801).
std::vector<int> read_idx_labels(const std::filesystem::path& path, std::size_t limit = 0);

struct MnistData {
    SampleBatch train;
    SampleBatch test;
};

/// Loads train-images-idx3-ubyte / train-labels-idx1-ubyte /
/// t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte from `dir`.
MnistData load_mnist(const std::filesystem::path& dir, std::size_t train_limit = 0,
                     std::size_t test_limit = 0);

/// Directory named by the DBRO_MNIST_DIR environment variable, if set.
std::optional<std::filesystem::path> mnist_dir_from_env();

} // namespace dbro
