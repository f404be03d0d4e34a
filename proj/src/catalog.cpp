// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/catalog.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "vidrag/error.hpp"

namespace vidrag {

using json = nlohmann::json;

namespace {

Error schema_error(std::size_t line, const std::string& what) {
    return Error(ErrorCode::kSchemaError, "line " + std::to_string(line) + ": " + what, line);
}

std::string optional_string(const json& record, const char* key, std::size_t line) {
    const auto it = record.find(key);
    if (it == record.end() || it->is_null()) return {};
    if (!it->is_string()) throw schema_error(line, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

template <typename Item>
std::vector<Item> parse_timed_items(const json& record, const char* key, std::size_t line) {
    std::vector<Item> items;
    const auto it = record.find(key);
    if (it == record.end() || it->is_null()) return items;
    if (!it->is_array()) throw schema_error(line, std::string("field '") + key + "' must be an array");
    for (const auto& entry : *it) {
        if (!entry.is_object()) throw schema_error(line, std::string(key) + " entries must be objects");
        const auto start = entry.find("start_ms");
        const auto end = entry.find("end_ms");
        const auto text = entry.find("text");
        if (start == entry.end() || !start->is_number_integer() || end == entry.end() ||
            !end->is_number_integer() || text == entry.end() || !text->is_string()) {
            throw schema_error(line, std::string(key) + " entries need integer start_ms/end_ms and string text");
        }
        TimeSpan span{start->get<std::int64_t>(), end->get<std::int64_t>()};
        if (!span.valid()) throw schema_error(line, std::string(key) + " entry has an invalid time span");
        auto normalized = normalize_caption_text(text->get<std::string>());
        if (normalized.empty()) continue;
        items.push_back(Item{span, std::move(normalized)});
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.span < b.span; });
    return items;
}

template <typename Item>
std::string join_texts(const std::vector<Item>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += '\n';
        out += items[i].text;
    }
    return out;
}

std::uint64_t lower_median(std::vector<std::uint64_t> values) {
    if (values.empty()) return 0;
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

FieldStat field_stat(const std::vector<std::uint64_t>& values) {
    FieldStat stat;
    for (auto v : values) stat.total += v;
    stat.median = lower_median(values);
    return stat;
}

std::string with_commas(std::uint64_t v) {
    auto digits = std::to_string(v);
    std::string out;
    const auto n = digits.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && (n - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return out;
}

}  // namespace

std::string_view field_variant_name(FieldVariant variant) {
    switch (variant) {
        case FieldVariant::kAsr: return "ASR";
        case FieldVariant::kVisualCaptions: return "VISUAL_CAPTIONS";
        case FieldVariant::kTitle: return "TITLE";
        case FieldVariant::kTitleDescription: return "TITLE_DESCRIPTION";
        case FieldVariant::kAlignedTranscript: return "ALIGNED_TRANSCRIPT";
    }
    return "";
}

std::string_view field_variant_label(FieldVariant variant) {
    switch (variant) {
        case FieldVariant::kAsr: return "ASR";
        case FieldVariant::kVisualCaptions: return "Visual Captions";
        case FieldVariant::kTitle: return "Title";
        case FieldVariant::kTitleDescription: return "Title + Description";
        case FieldVariant::kAlignedTranscript: return "Aligned Transcript";
    }
    return "";
}

std::optional<FieldVariant> parse_field_variant(std::string_view name) {
    for (auto v : kAllFieldVariants) {
        if (field_variant_name(v) == name) return v;
    }
    return std::nullopt;
}

std::string field_text(const VideoDocument& video, FieldVariant variant) {
    switch (variant) {
        case FieldVariant::kAsr: return join_texts(video.cues);
        case FieldVariant::kVisualCaptions: return join_texts(video.scenes);
        case FieldVariant::kTitle: return video.title;
        case FieldVariant::kTitleDescription: return video.title + "\n" + video.description;
        case FieldVariant::kAlignedTranscript: return render(video.transcript());
    }
    return {};
}

std::vector<VideoDocument> parse_catalog(std::string_view raw) {
    std::vector<VideoDocument> catalog;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        ++line_no;
        auto nl = raw.find('\n', pos);
        if (nl == std::string_view::npos) nl = raw.size();
        const auto line = raw.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw schema_error(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!record.is_object()) throw schema_error(line_no, "record must be a JSON object");
        const auto id = record.find("video_id");
        if (id == record.end() || !id->is_string() || id->get<std::string>().empty()) {
            throw schema_error(line_no, "missing required field 'video_id'");
        }

        VideoDocument doc;
        doc.video_id = id->get<std::string>();
        doc.title = optional_string(record, "title", line_no);
        doc.description = optional_string(record, "description", line_no);
        doc.url = optional_string(record, "url", line_no);
        doc.scenes = parse_timed_items<SceneCaption>(record, "scenes", line_no);
        doc.cues = parse_timed_items<SubtitleCue>(record, "cues", line_no);
        if (!seen.insert(doc.video_id).second) {
            throw Error(ErrorCode::kDuplicateVideoId,
                        "line " + std::to_string(line_no) + ": '" + doc.video_id + "'", line_no);
        }
        catalog.push_back(std::move(doc));
    }
    return catalog;
}

std::vector<VideoDocument> load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open catalog " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_catalog(buffer.str());
}

std::string catalog_line(const VideoDocument& video) {
    nlohmann::ordered_json record;
    record["video_id"] = video.video_id;
    record["title"] = video.title;
    record["description"] = video.description;
    record["url"] = video.url;
    auto items = [](const auto& list) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& item : list) {
            arr.push_back({{"start_ms", item.span.start_ms}, {"end_ms", item.span.end_ms}, {"text", item.text}});
        }
        return arr;
    };
    record["scenes"] = items(video.scenes);
    record["cues"] = items(video.cues);
    return record.dump();
}

const VideoDocument& find_video(const std::vector<VideoDocument>& catalog, std::string_view video_id) {
    const auto it = std::find_if(catalog.begin(), catalog.end(),
                                 [&](const VideoDocument& v) { return v.video_id == video_id; });
    if (it == catalog.end()) throw Error(ErrorCode::kNotFound, "unknown video '" + std::string(video_id) + "'");
    return *it;
}

std::size_t utf8_length(std::string_view text) {
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::uint64_t video_duration_s(const VideoDocument& video) {
    std::int64_t end = 0;
    for (const auto& s : video.scenes) end = std::max(end, s.span.end_ms);
    for (const auto& c : video.cues) end = std::max(end, c.span.end_ms);
    return static_cast<std::uint64_t>(end / 1000);
}

CorpusStats corpus_stats(const std::vector<VideoDocument>& catalog) {
    if (catalog.empty()) throw Error(ErrorCode::kEmptyCatalog, "catalog has no videos");
    const auto n = catalog.size();
    std::vector<std::uint64_t> scenes(n), durations(n), title(n), description(n), title_desc(n),
        visual(n), speech(n), aligned(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = catalog[i];
        scenes[i] = v.scenes.size();
        durations[i] = video_duration_s(v);
        title[i] = utf8_length(v.title);
        description[i] = utf8_length(v.description);
        title_desc[i] = utf8_length(field_text(v, FieldVariant::kTitleDescription));
        visual[i] = utf8_length(field_text(v, FieldVariant::kVisualCaptions));
        speech[i] = utf8_length(field_text(v, FieldVariant::kAsr));
        aligned[i] = utf8_length(field_text(v, FieldVariant::kAlignedTranscript));
    }
    CorpusStats stats;
    stats.video_count = n;
    const auto scene_stat = field_stat(scenes);
    stats.scene_count = scene_stat.total;
    stats.median_scene_count = scene_stat.median;
    const auto duration_stat = field_stat(durations);
    stats.total_duration_s = duration_stat.total;
    stats.median_duration_s = duration_stat.median;
    stats.title = field_stat(title);
    stats.description = field_stat(description);
    stats.title_description = field_stat(title_desc);
    stats.visual_captions = field_stat(visual);
    stats.subtitles = field_stat(speech);
    stats.aligned_transcript = field_stat(aligned);
    return stats;
}

nlohmann::ordered_json stats_to_json(const CorpusStats& stats) {
    auto field = [](const FieldStat& f) { return nlohmann::ordered_json{{"total", f.total}, {"median", f.median}}; };
    nlohmann::ordered_json out;
    out["video_count"] = stats.video_count;
    out["scene_count"] = {{"total", stats.scene_count}, {"median", stats.median_scene_count}};
    out["duration_s"] = {{"total", stats.total_duration_s}, {"median", stats.median_duration_s}};
    out["chars"] = {
        {"title", field(stats.title)},
        {"description", field(stats.description)},
        {"title_description", field(stats.title_description)},
        {"visual_captions", field(stats.visual_captions)},
        {"subtitles", field(stats.subtitles)},
        {"aligned_transcript", field(stats.aligned_transcript)},
    };
    return out;
}

std::string render_stats_table(const CorpusStats& stats) {
    std::ostringstream out;
    char buf[160];
    auto row = [&](const char* name, const std::string& total, const std::string& median) {
        std::snprintf(buf, sizeof(buf), "%-26s %16s %12s\n", name, total.c_str(), median.c_str());
        out << buf;
    };
    auto med = [](std::uint64_t v) { return with_commas(v) + ".00"; };
    row("DATASET DIMENSION", "TOTAL", "MEDIAN");
    row("Video Count", with_commas(stats.video_count), "-");
    row("Scene Count", with_commas(stats.scene_count), med(stats.median_scene_count));
    row("Video Duration (seconds)", with_commas(stats.total_duration_s), med(stats.median_duration_s));
    out << "Text Character Length\n";
    const std::pair<const char*, const FieldStat*> fields[] = {
        {"Title", &stats.title},
        {"Description", &stats.description},
        {"Title + Description", &stats.title_description},
        {"Visual Video Captions", &stats.visual_captions},
        {"Subtitles / ASR", &stats.subtitles},
        {"Aligned Captions", &stats.aligned_transcript},
    };
    for (const auto& [name, f] : fields) row(name, with_commas(f->total), med(f->median));
    return out.str();
}

}  // namespace vidrag
