#include "ffcvsr/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ffcvsr/error.hpp"
#include "ffcvsr/frame_store.hpp"
#include "ffcvsr/resample.hpp"

namespace fs = std::filesystem;

namespace ffcvsr {

namespace {

constexpr const char* kManifestMagic = "ffcvsr-manifest";
constexpr int kManifestVersion = 1;

double mean_abs_diff(const Tensor& a, const Tensor& b) {
    const float* pa = a.data();
    const float* pb = b.data();
    const int64_t count = a.numel();
    double sum = 0.0;
    for (int64_t i = 0; i < count; ++i)
        sum += std::fabs(static_cast<double>(pa[i]) - static_cast<double>(pb[i]));
    return sum / count;
}

Tensor crop_patch(const Tensor& frame, int64_t y0, int64_t x0, int64_t size) {
    Tensor out = Tensor::zeros(Shape{1, 1, size, size});
    const Shape& s = frame.shape();
    for (int64_t y = 0; y < size; ++y) {
        const float* src = frame.data() + (y0 + y) * s.w + x0;
        std::copy(src, src + size, out.data() + y * size);
    }
    return out;
}

std::string clip_dir_name(int64_t id) {
    std::string digits = std::to_string(id);
    digits.insert(0, digits.size() < 6 ? 6 - digits.size() : 0, '0');
    return "clips/" + digits;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, '\t'))
        fields.push_back(field);
    return fields;
}

} // namespace

DatasetManifest prepare_dataset(const std::string& src_dir, const std::string& out_dir,
                                const DatasetParams& params) {
    check(params.scale >= 1, "prepare: scale must be >= 1");
    check(params.patch_size >= params.scale && params.patch_size % params.scale == 0,
          "prepare: patch size ", params.patch_size, " must be divisible by scale ",
          params.scale);
    check(params.clip_length >= 1, "prepare: clip length must be >= 1");
    check(!params.pyramid_factors.empty(), "prepare: no pyramid factors given");
    check(params.frame_format == "png" || params.frame_format == "pgm",
          "prepare: unsupported frame format '", params.frame_format, "'");

    FrameStore src = FrameStore::open(src_dir);
    std::vector<Tensor> source = src.read_all(params.luma_convert);
    fs::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.params = params;
    manifest.source = src_dir;

    const int64_t frames = static_cast<int64_t>(source.size());
    if (frames < params.clip_length) {
        manifest.skipped_short_videos = 1;
        manifest.save((fs::path(out_dir) / "manifest.tsv").string());
        return manifest;
    }

    int64_t next_id = 1;
    for (int factor : params.pyramid_factors) {
        check(factor >= 1, "prepare: invalid pyramid factor ", factor);
        const Shape& ss = source.front().shape();
        check(ss.h % factor == 0 && ss.w % factor == 0, "prepare: source extents ", ss.str(),
              " not divisible by pyramid factor ", factor);

        std::vector<Tensor> level;
        level.reserve(source.size());
        for (const Tensor& f : source)
            level.push_back(factor == 1 ? f : bicubic_downsample(f, factor));

        const Shape& ls = level.front().shape();
        if (ls.h < params.patch_size || ls.w < params.patch_size)
            continue; // level too small for the patch grid

        const int64_t grid_y = ls.h / params.patch_size;
        const int64_t grid_x = ls.w / params.patch_size;
        const int64_t blocks = frames / params.clip_length;

        for (int64_t blk = 0; blk < blocks; ++blk) {
            const int64_t t0 = blk * params.clip_length;

            bool scene_cut = false;
            for (int64_t t = t0; t + 1 < t0 + params.clip_length; ++t)
                if (mean_abs_diff(level[t], level[t + 1]) > params.mad_threshold) {
                    scene_cut = true;
                    break;
                }
            if (scene_cut) {
                manifest.skipped_scene_cuts += grid_y * grid_x;
                continue;
            }

            for (int64_t gy = 0; gy < grid_y; ++gy) {
                for (int64_t gx = 0; gx < grid_x; ++gx) {
                    ManifestEntry entry;
                    entry.id = next_id++;
                    entry.level = factor;
                    entry.patch_y = gy * params.patch_size;
                    entry.patch_x = gx * params.patch_size;
                    entry.frame_begin = t0 + 1;
                    entry.frame_count = params.clip_length;
                    const std::string rel = clip_dir_name(entry.id);
                    entry.hr_dir = rel + "/hr";
                    entry.lr_dir = rel + "/lr";

                    FrameStore hr_store = FrameStore::create(
                        (fs::path(out_dir) / entry.hr_dir).string(), params.frame_format);
                    FrameStore lr_store = FrameStore::create(
                        (fs::path(out_dir) / entry.lr_dir).string(), params.frame_format);
                    for (int64_t t = t0; t < t0 + params.clip_length; ++t) {
                        Tensor hr = crop_patch(level[t], entry.patch_y, entry.patch_x,
                                               params.patch_size);
                        hr_store.append(hr);
                        lr_store.append(bilinear_downsample(hr, params.scale));
                    }
                    manifest.clips.push_back(std::move(entry));
                }
            }
        }
    }

    manifest.save((fs::path(out_dir) / "manifest.tsv").string());
    return manifest;
}

void DatasetManifest::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    check(os.good(), "manifest: cannot open '", path, "' for writing");
    os << kManifestMagic << "\t" << kManifestVersion << "\n";
    os << "source\t" << source << "\n";
    os << "scale\t" << params.scale << "\n";
    os << "patch_size\t" << params.patch_size << "\n";
    os << "clip_length\t" << params.clip_length << "\n";
    os << "mad_threshold\t" << params.mad_threshold << "\n";
    os << "format\t" << params.frame_format << "\n";
    for (const ManifestEntry& e : clips)
        os << "clip\t" << e.id << "\t" << e.level << "\t" << e.patch_x << "\t" << e.patch_y
           << "\t" << e.frame_begin << "\t" << e.frame_count << "\t" << e.lr_dir << "\t"
           << e.hr_dir << "\n";
    os << "skipped_scene_cuts\t" << skipped_scene_cuts << "\n";
    os << "skipped_short_videos\t" << skipped_short_videos << "\n";
    check(os.good(), "manifest: write to '", path, "' failed");
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    std::ifstream is(path);
    check(is.good(), "manifest: cannot open '", path, "'");

    DatasetManifest manifest;
    std::string line;
    check(static_cast<bool>(std::getline(is, line)), "manifest: '", path, "' is empty");
    auto header = split_tabs(line);
    check(header.size() == 2 && header[0] == kManifestMagic, "manifest: '", path,
          "' is not a dataset manifest");
    check(std::stoi(header[1]) == kManifestVersion, "manifest: unsupported version ",
          header[1]);

    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        auto fields = split_tabs(line);
        const std::string& key = fields[0];
        if (key == "clip") {
            check(fields.size() == 9, "manifest: malformed clip line '", line, "'");
            ManifestEntry e;
            e.id = std::stoll(fields[1]);
            e.level = std::stoi(fields[2]);
            e.patch_x = std::stoll(fields[3]);
            e.patch_y = std::stoll(fields[4]);
            e.frame_begin = std::stoll(fields[5]);
            e.frame_count = std::stoll(fields[6]);
            e.lr_dir = fields[7];
            e.hr_dir = fields[8];
            manifest.clips.push_back(std::move(e));
        } else if (key == "source") {
            manifest.source = fields.size() > 1 ? fields[1] : "";
        } else if (key == "scale") {
            manifest.params.scale = std::stoi(fields.at(1));
        } else if (key == "patch_size") {
            manifest.params.patch_size = std::stoi(fields.at(1));
        } else if (key == "clip_length") {
            manifest.params.clip_length = std::stoi(fields.at(1));
        } else if (key == "mad_threshold") {
            manifest.params.mad_threshold = std::stod(fields.at(1));
        } else if (key == "format") {
            manifest.params.frame_format = fields.at(1);
        } else if (key == "skipped_scene_cuts") {
            manifest.skipped_scene_cuts = std::stoll(fields.at(1));
        } else if (key == "skipped_short_videos") {
            manifest.skipped_short_videos = std::stoll(fields.at(1));
        } else {
            fail("manifest: unknown key '", key, "' in '", path, "'");
        }
    }
    return manifest;
}

std::vector<Clip> load_clips(const std::string& manifest_path) {
    DatasetManifest manifest = DatasetManifest::load(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();

    std::vector<Clip> clips;
    clips.reserve(manifest.clips.size());
    for (const ManifestEntry& e : manifest.clips) {
        Clip clip;
        clip.lr_frames = FrameStore::open((base / e.lr_dir).string()).read_all();
        clip.hr_frames = FrameStore::open((base / e.hr_dir).string()).read_all();
        clip.validate(manifest.params.scale);
        clips.push_back(std::move(clip));
    }
    return clips;
}

} // namespace ffcvsr
