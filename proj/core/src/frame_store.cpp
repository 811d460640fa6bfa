#include "ffcvsr/frame_store.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "ffcvsr/error.hpp"
#include "ffcvsr/image_io.hpp"

namespace fs = std::filesystem;

namespace ffcvsr {

FrameStore FrameStore::open(const std::string& dir) {
    check(fs::is_directory(dir), "frame store: '", dir, "' is not a directory");

    std::set<int64_t> indices;
    std::string extension;
    int index_width = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::string stem = entry.path().stem().string();
        std::string ext = entry.path().extension().string();
        if (!ext.empty())
            ext = ext.substr(1);
        if (ext != "png" && ext != "pgm")
            continue;
        check(!stem.empty() && std::all_of(stem.begin(), stem.end(),
                                           [](unsigned char c) { return std::isdigit(c); }),
              "frame store: unexpected file name '", entry.path().filename().string(), "' in '",
              dir, "'");
        if (extension.empty()) {
            extension = ext;
            index_width = static_cast<int>(stem.size());
        } else {
            check(ext == extension, "frame store: mixed extensions in '", dir, "'");
            check(static_cast<int>(stem.size()) == index_width,
                  "frame store: mixed index widths in '", dir, "'");
        }
        indices.insert(std::stoll(stem));
    }
    check(!indices.empty(), "frame store: no frames found in '", dir, "'");
    check(*indices.begin() == 1 && *indices.rbegin() == static_cast<int64_t>(indices.size()),
          "frame store: frame numbering in '", dir, "' is not contiguous from 1");

    FrameStore store;
    store.dir_ = dir;
    store.extension_ = extension;
    store.index_width_ = index_width;
    store.frame_count_ = static_cast<int64_t>(indices.size());
    return store;
}

FrameStore FrameStore::create(const std::string& dir, const std::string& extension,
                              int index_width) {
    check(extension == "png" || extension == "pgm", "frame store: unsupported extension '",
          extension, "'");
    check(index_width >= 1 && index_width <= 12, "frame store: invalid index width ",
          index_width);
    fs::create_directories(dir);
    FrameStore store;
    store.dir_ = dir;
    store.extension_ = extension;
    store.index_width_ = index_width;
    store.frame_count_ = 0;
    return store;
}

std::string FrameStore::frame_path(int64_t index) const {
    check(index >= 1, "frame store: indices are 1-based, got ", index);
    std::string digits = std::to_string(index);
    check(static_cast<int>(digits.size()) <= index_width_, "frame store: index ", index,
          " exceeds the store's index width ", index_width_);
    digits.insert(0, static_cast<size_t>(index_width_) - digits.size(), '0');
    return (fs::path(dir_) / (digits + "." + extension_)).string();
}

Tensor FrameStore::read(int64_t index, bool luma_convert) const {
    check(index >= 1 && index <= frame_count_, "frame store: frame ", index,
          " out of range (store has ", frame_count_, ")");
    return read_frame(frame_path(index), luma_convert);
}

std::vector<Tensor> FrameStore::read_all(bool luma_convert) const {
    std::vector<Tensor> frames;
    frames.reserve(static_cast<size_t>(frame_count_));
    for (int64_t i = 1; i <= frame_count_; ++i) {
        frames.push_back(read(i, luma_convert));
        check(frames.back().shape() == frames.front().shape(), "frame store: frame ", i,
              " has shape ", frames.back().shape().str(), ", expected ",
              frames.front().shape().str());
    }
    return frames;
}

void FrameStore::append(const Tensor& frame) {
    frame_count_ += 1;
    write_frame(frame, frame_path(frame_count_));
}

} // namespace ffcvsr
