#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "groundkit/image.hpp"
#include "groundkit/types.hpp"

namespace gktest {

// Self-cleaning unique directory under the system temp root.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Deterministic pixel painters.
groundkit::img::Image noise_image(int w, int h, std::uint64_t seed);
groundkit::img::Image gradient_image(int w, int h, bool horizontal);
groundkit::img::Image constant_image(int w, int h, std::uint8_t value);

// Writes manifest + jsonl files (and leaves image files to the caller).
void write_corpus_files(const std::filesystem::path& dir,
                        const std::vector<groundkit::Screenshot>& screenshots,
                        const std::vector<groundkit::UiElement>& elements,
                        const std::string& name = "fixture");

// Small ready-made corpus: 2 screenshots (PGM on disk), 5 elements.
std::filesystem::path make_mini_corpus(const TempDir& dir);

// Dedup ground-truth fixture: 100 elements over 10 screenshots forming
// 40 visually distinct clusters (20 of size 3, 20 of size 2). Cluster
// members are byte-identical crops sharing a label; four cluster pairs
// share a label and are separated by the hash gate alone.
struct DedupFixture {
    std::filesystem::path root;
    std::vector<std::vector<std::string>> truth; // sorted member ids, sorted
};
DedupFixture make_dedup_fixture(const TempDir& dir);

std::string slurp_file(const std::filesystem::path& p);

} // namespace gktest
