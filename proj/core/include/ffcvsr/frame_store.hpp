#pragma once

#include <string>
#include <vector>

#include "ffcvsr/tensor.hpp"

namespace ffcvsr {

// A directory of sequentially numbered single-channel image files holding one
// video: zero-padded indices starting at 1, one fixed extension per store
// (e.g. 000001.png). Numbering must be contiguous.
class FrameStore {
public:
    // Scans an existing directory and validates the numbering.
    static FrameStore open(const std::string& dir);

    // Creates the directory (parents included) for writing.
    static FrameStore create(const std::string& dir, const std::string& extension = "png",
                             int index_width = 6);

    int64_t frame_count() const { return frame_count_; }
    const std::string& dir() const { return dir_; }
    const std::string& extension() const { return extension_; }

    std::string frame_path(int64_t index) const; // 1-based

    Tensor read(int64_t index, bool luma_convert = false) const;
    std::vector<Tensor> read_all(bool luma_convert = false) const;

    // Writes the next frame (index frame_count() + 1).
    void append(const Tensor& frame);

private:
    std::string dir_;
    std::string extension_ = "png";
    int index_width_ = 6;
    int64_t frame_count_ = 0;
};

} // namespace ffcvsr
