#include "dbro/mnist.hpp"

#include <array>
#include <cstdint>
#include <cstdlib>
#include <fstream>

namespace dbro {

namespace {

std::uint32_t read_be32(std::istream& is) {
    std::array<unsigned char, 4> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw Error("truncated IDX header");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return is;
}

} // namespace

Matrix read_idx_images(const std::filesystem::path& path, std::size_t limit) {
    auto is = open_binary(path);
    if (read_be32(is) != 0x00000803u) throw Error(path.string() + ": not an IDX3 image file");
    std::size_t count = read_be32(is);
    const std::size_t rows = read_be32(is);
    const std::size_t cols = read_be32(is);
    if (limit > 0) count = std::min(count, limit);
    const std::size_t pixels = rows * cols;

    Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
    std::vector<unsigned char> buf(pixels);
    for (std::size_t r = 0; r < count; ++r) {
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
            throw Error(path.string() + ": truncated image data");
        }
        for (std::size_t c = 0; c < pixels; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buf[c] / 255.0;
        }
    }
    return out;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path, std::size_t limit) {
    auto is = open_binary(path);
    if (read_be32(is) != 0x00000801u) throw Error(path.string() + ": not an IDX1 label file");
    std::size_t count = read_be32(is);
    if (limit > 0) count = std::min(count, limit);
    std::vector<unsigned char> buf(count);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count))) {
        throw Error(path.string() + ": truncated label data");
    }
    return {buf.begin(), buf.end()};
}

MnistData load_mnist(const std::filesystem::path& dir, std::size_t train_limit,
                     std::size_t test_limit) {
    MnistData d;
    d.train.features = read_idx_images(dir / "train-images-idx3-ubyte", train_limit);
    d.train.labels = read_idx_labels(dir / "train-labels-idx1-ubyte", train_limit);
    d.test.features = read_idx_images(dir / "t10k-images-idx3-ubyte", test_limit);
    d.test.labels = read_idx_labels(dir / "t10k-labels-idx1-ubyte", test_limit);
    if (d.train.size() != d.train.labels.size() || d.test.size() != d.test.labels.size()) {
        throw Error("MNIST image and label counts differ");
    }
    return d;
}

std::optional<std::filesystem::path> mnist_dir_from_env() {
    if (const char* v = std::getenv("DBRO_MNIST_DIR"); v != nullptr && *v != '\0') {
        return std::filesystem::path(v);
    }
    return std::nullopt;
}

} // namespace dbro
