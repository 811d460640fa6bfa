#pragma once

#include <string>
#include <vector>

#include "ffcvsr/trainer.hpp"

namespace ffcvsr {

struct DatasetParams {
    int scale = 4;
    std::vector<int> pyramid_factors = {1}; // extra downscaled copies of the source
    int patch_size = 128;                   // HR patch extent; divisible by scale
    int clip_length = 10;
    double mad_threshold = 0.1; // scene-cut rejection: mean absolute difference
    std::string frame_format = "pgm";
    bool luma_convert = false; // convert color source frames on read
};

struct ManifestEntry {
    int64_t id = 0;
    int level = 1; // pyramid factor
    int64_t patch_x = 0;
    int64_t patch_y = 0;
    int64_t frame_begin = 1; // 1-based index into the level's frames
    int64_t frame_count = 0;
    std::string lr_dir; // relative to the manifest's directory
    std::string hr_dir;
};

struct DatasetManifest {
    DatasetParams params;
    std::string source;
    std::vector<ManifestEntry> clips;
    int64_t skipped_scene_cuts = 0;
    int64_t skipped_short_videos = 0;

    void save(const std::string& path) const;
    static DatasetManifest load(const std::string& path);
};

// Builds the HR pyramid (bicubic), extracts co-located patch clips of
// clip_length consecutive frames, and writes LR clips produced by bilinear
// downsampling. Clips overlapping a scene cut (MAD above the threshold) are
// skipped and counted.
DatasetManifest prepare_dataset(const std::string& src_dir, const std::string& out_dir,
                                const DatasetParams& params);

// Loads every clip listed in a manifest into memory.
std::vector<Clip> load_clips(const std::string& manifest_path);

} // namespace ffcvsr
