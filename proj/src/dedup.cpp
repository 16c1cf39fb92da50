#include "groundkit/dedup.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "groundkit/error.hpp"
#include "groundkit/rng.hpp"

namespace groundkit::dedup {

namespace {

// Decodes one UTF-8 code point; returns its length in bytes, 0 on
// malformed input.
int decode_utf8(const std::string& s, std::size_t i, char32_t& cp) {
    const unsigned char c0 = static_cast<unsigned char>(s[i]);
    if (c0 < 0x80) {
        cp = c0;
        return 1;
    }
    int len = 0;
    if ((c0 & 0xE0) == 0xC0) {
        cp = c0 & 0x1F;
        len = 2;
    } else if ((c0 & 0xF0) == 0xE0) {
        cp = c0 & 0x0F;
        len = 3;
    } else if ((c0 & 0xF8) == 0xF0) {
        cp = c0 & 0x07;
        len = 4;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (int k = 1; k < len; ++k) {
        const unsigned char c = static_cast<unsigned char>(s[i + k]);
        if ((c & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (c & 0x3F);
    }
    return len;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space_cp(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
           cp == U'\v' || cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
           cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

char32_t lower_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    // Latin-1 supplement letters (except the division sign at 0xD7).
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    // Latin Extended-A pairs upper/lower codepoints.
    if (cp >= 0x100 && cp <= 0x177 && cp % 2 == 0) return cp + 1;
    if (cp >= 0x179 && cp <= 0x17E && cp % 2 == 1) return cp + 1;
    return cp;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

std::string normalize_label(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    bool seen_content = false;
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp;
        int len = decode_utf8(s, i, cp);
        if (len == 0) { // malformed byte: copy as-is
            cp = static_cast<unsigned char>(s[i]);
            len = 1;
            if (pending_space && seen_content) out.push_back(' ');
            pending_space = false;
            seen_content = true;
            out.push_back(s[i]);
            i += len;
            continue;
        }
        if (is_space_cp(cp)) {
            pending_space = true;
        } else {
            if (pending_space && seen_content) out.push_back(' ');
            pending_space = false;
            seen_content = true;
            append_utf8(out, lower_cp(cp));
        }
        i += len;
    }
    return out;
}

DedupResult dedup_elements(const Corpus& c, const DedupConfig& cfg, std::uint64_t seed) {
    require(cfg.hamming_threshold >= 0 && cfg.hamming_threshold <= 64, ErrorCode::InvalidArgument,
            "hamming_threshold must be within 0-64");

    DedupResult result;
    DedupReport& report = result.report;

    // Hash crops screenshot by screenshot so each image is decoded once;
    // screenshots are independent, so they parallelize cleanly.
    struct Hashed {
        std::size_t element_idx;
        PerceptualHash hash;
    };
    std::vector<std::string> shot_ids;
    shot_ids.reserve(c.elements_by_screenshot.size());
    for (const Screenshot& s : c.screenshots) {
        if (!c.elements_by_screenshot.at(s.id).empty()) shot_ids.push_back(s.id);
    }

    std::vector<Hashed> hashed;
    hashed.reserve(c.elements.size());
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max<std::size_t>(shot_ids.size(), 1));

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= shot_ids.size()) return;
            const std::string& sid = shot_ids[i];
            const Screenshot& shot = *c.find_screenshot(sid);
            img::Image image;
            try {
                image = img::load_image(c.image_file(shot));
            } catch (const Error& e) {
                std::lock_guard lk(mu);
                for (std::size_t ei : c.elements_by_screenshot.at(sid)) {
                    ++report.skipped_count;
                    report.skipped_messages.push_back("element " + c.elements[ei].id +
                                                      " skipped: " + e.what());
                }
                continue;
            }
            std::vector<Hashed> local;
            local.reserve(c.elements_by_screenshot.at(sid).size());
            for (std::size_t ei : c.elements_by_screenshot.at(sid)) {
                try {
                    img::Image cropped = crop_for_box(image, c.elements[ei].bbox);
                    local.push_back({ei, phash(cropped, cfg.min_crop_px)});
                } catch (const Error& e) {
                    std::lock_guard lk(mu);
                    ++report.skipped_count;
                    report.skipped_messages.push_back("element " + c.elements[ei].id +
                                                      " skipped: " + e.what());
                }
            }
            std::lock_guard lk(mu);
            hashed.insert(hashed.end(), local.begin(), local.end());
        }
    };
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Deterministic order regardless of thread scheduling.
    std::sort(hashed.begin(), hashed.end(),
              [](const Hashed& a, const Hashed& b) { return a.element_idx < b.element_idx; });
    std::sort(report.skipped_messages.begin(), report.skipped_messages.end());
    report.input_count = hashed.size();

    // Label gate first: only same-bucket pairs are hash-compared.
    std::unordered_map<std::string, std::vector<std::size_t>> buckets; // key -> hashed[]
    for (std::size_t i = 0; i < hashed.size(); ++i) {
        const std::string& label = c.elements[hashed[i].element_idx].label;
        buckets[cfg.label_mode == LabelMode::Normalized ? normalize_label(label) : label]
            .push_back(i);
    }

    UnionFind uf(hashed.size());
    for (const auto& [key, members] : buckets) {
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                if (hamming(hashed[members[a]].hash, hashed[members[b]].hash) <=
                    cfg.hamming_threshold) {
                    uf.unite(members[a], members[b]);
                }
            }
        }
    }

    std::unordered_map<std::size_t, std::vector<std::size_t>> groups; // root -> hashed[]
    for (std::size_t i = 0; i < hashed.size(); ++i) groups[uf.find(i)].push_back(i);

    std::vector<std::vector<std::size_t>> clusters; // element indexes
    clusters.reserve(groups.size());
    for (auto& [root, members] : groups) {
        std::vector<std::size_t> elems;
        elems.reserve(members.size());
        for (std::size_t m : members) elems.push_back(hashed[m].element_idx);
        std::sort(elems.begin(), elems.end());
        clusters.push_back(std::move(elems));
    }
    std::sort(clusters.begin(), clusters.end());

    // Representative selection: visit clusters in seeded order and pick
    // the member whose screenshot has supplied the fewest reps so far,
    // so no single interface is over-represented.
    auto engine = rng::make_engine(seed);
    std::vector<std::size_t> order(clusters.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng::shuffle(order, engine);

    std::unordered_map<std::string, std::size_t> reps_per_shot;
    std::vector<std::string> representative(clusters.size());
    for (std::size_t ci : order) {
        const std::vector<std::size_t>& members = clusters[ci];
        std::vector<std::size_t> pick(members.size());
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        rng::shuffle(pick, engine);
        std::size_t best = pick[0];
        std::size_t best_load = reps_per_shot[c.elements[members[best]].screenshot_id];
        for (std::size_t k = 1; k < pick.size(); ++k) {
            const std::size_t load = reps_per_shot[c.elements[members[pick[k]]].screenshot_id];
            if (load < best_load) {
                best = pick[k];
                best_load = load;
            }
        }
        const UiElement& rep = c.elements[members[best]];
        ++reps_per_shot[rep.screenshot_id];
        representative[ci] = rep.id;
    }

    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        Cluster cl;
        cl.representative_id = representative[ci];
        for (std::size_t ei : clusters[ci]) cl.member_ids.push_back(c.elements[ei].id);
        ++report.cluster_size_hist[cl.member_ids.size()];
        result.unique_ids.push_back(cl.representative_id);
        report.clusters.push_back(std::move(cl));
    }
    report.unique_count = report.clusters.size();
    return result;
}

std::string DedupReport::to_json(bool include_members) const {
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [size, count] : cluster_size_hist) hist[std::to_string(size)] = count;
    nlohmann::json cls = nlohmann::json::array();
    for (const Cluster& cl : clusters) {
        nlohmann::json entry = {{"representative", cl.representative_id},
                                {"size", cl.member_ids.size()}};
        if (include_members) entry["members"] = cl.member_ids;
        cls.push_back(std::move(entry));
    }
    nlohmann::json doc = {{"input_count", input_count},
                          {"unique_count", unique_count},
                          {"skipped_count", skipped_count},
                          {"skipped", skipped_messages},
                          {"cluster_size_hist", hist},
                          {"clusters", cls}};
    return doc.dump(2);
}

} // namespace groundkit::dedup
