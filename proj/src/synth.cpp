#include "emoscreen/synth.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <random>

#include "emoscreen/image_io.hpp"

namespace emoscreen {

namespace {

// Per-frame emission probabilities in canonical order
// [happy, neutral, sad, angry, surprise, other].
std::array<double, kEmotionCount> group_profile(Group group, int frame_1based) {
    std::array<double, kEmotionCount> p{};
    if (group == Group::Healthy) {
        p = {0.45, 0.34, 0.10, 0.03, 0.02, 0.06};
        if (frame_1based >= 220 && frame_1based <= 280) p = {0.35, 0.24, 0.30, 0.03, 0.02, 0.06};
    } else {
        p = {0.18, 0.47, 0.10, 0.14, 0.02, 0.09};
        if (frame_1based >= 200 && frame_1based <= 250) p = {0.10, 0.20, 0.08, 0.55, 0.02, 0.05};
    }
    return p;
}

std::array<double, kEmotionCount> mixed_profile(Group group, int frame_1based, double noise) {
    const auto own = group_profile(group, frame_1based);
    const auto healthy = group_profile(Group::Healthy, frame_1based);
    const auto impaired = group_profile(Group::Impaired, frame_1based);
    std::array<double, kEmotionCount> p{};
    for (int e = 0; e < kEmotionCount; ++e) {
        const double pooled = 0.5 * (healthy[e] + impaired[e]);
        p[e] = (1.0 - noise) * own[e] + noise * pooled;
    }
    return p;
}

int sample_emotion(const std::array<double, kEmotionCount>& p, std::mt19937& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    for (int e = 0; e < kEmotionCount; ++e) {
        u -= p[e];
        if (u <= 0.0) return e;
    }
    return kEmotionCount - 1;
}

}  // namespace

std::vector<Group> SynthCohort::groups() const {
    std::vector<Group> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.group());
    return out;
}

SynthCohort generate_synthetic_cohort(const SynthParams& params) {
    if (params.healthy < 1 || params.impaired < 1) {
        throw data_error("synthetic cohort needs at least 1 participant per group");
    }
    if (params.frames < 1) throw data_error("synthetic cohort needs at least 1 frame");
    if (params.noise < 0.0 || params.noise > 1.0) {
        throw data_error("synthetic noise must be in [0, 1]");
    }
    std::mt19937 rng(params.seed);
    SynthCohort cohort;
    const int total = params.healthy + params.impaired;
    for (int i = 0; i < total; ++i) {
        const Group group = i < params.healthy ? Group::Healthy : Group::Impaired;
        ParticipantRecord record;
        char id[16];
        std::snprintf(id, sizeof(id), "p%03d", i + 1);
        record.id = id;
        record.moca = group == Group::Healthy
                          ? 25 + static_cast<int>(rng() % 6)   // 25..30
                          : 20 + static_cast<int>(rng() % 5);  // 20..24
        cohort.records.push_back(record);

        EvolutionMatrix matrix(record.id, params.frames);
        for (int f = 0; f < params.frames; ++f) {
            const auto p = mixed_profile(group, f + 1, params.noise);
            const int emotion = sample_emotion(p, rng);
            matrix.set(emotion, f, 1.0);
        }
        matrix.validate();
        cohort.matrices.push_back(std::move(matrix));
    }
    return cohort;
}

namespace {

// 120x120 frame with a centered 40x40 bright square; brightness encodes the
// emotion. "other" frames omit the square entirely.
Tensor synth_frame(int emotion, int frame_index, std::mt19937& rng) {
    constexpr int kSize = 120;
    constexpr int kSquare = 40;
    std::uniform_real_distribution<float> jitter(-4.0f, 4.0f);
    Tensor frame(kSize, kSize, 1, 32.0f);
    for (float& v : frame.values()) v += jitter(rng);
    if (emotion == static_cast<int>(EmotionLabel::Other)) return frame;

    static constexpr float kBrightness[kEmotionCount] = {230.0f, 205.0f, 180.0f,
                                                         155.0f, 130.0f, 0.0f};
    const int offset = (frame_index % 3) - 1;  // small drift, keeps faces detectable
    const int x0 = (kSize - kSquare) / 2 + offset;
    const int y0 = (kSize - kSquare) / 2 + offset;
    for (int y = y0; y < y0 + kSquare; ++y) {
        for (int x = x0; x < x0 + kSquare; ++x) {
            frame.at(y, x, 0) = kBrightness[emotion] + jitter(rng);
        }
    }
    return frame;
}

}  // namespace

void write_synthetic_cohort(const SynthCohort& cohort, const std::string& out_dir,
                            int frame_participants, int frames_per_participant) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "matrices");

    std::ofstream manifest(fs::path(out_dir) / "cohort.jsonl");
    if (!manifest) throw io_error("cannot create cohort manifest under '" + out_dir + "'");
    for (std::size_t i = 0; i < cohort.records.size(); ++i) {
        const ParticipantRecord& record = cohort.records[i];
        const std::string matrix_rel = "matrices/" + record.id + ".csv";
        save_matrix_csv(cohort.matrices[i], (fs::path(out_dir) / matrix_rel).string());
        manifest << "{\"id\":\"" << record.id << "\",\"moca\":" << record.moca
                 << ",\"matrix_csv\":\"" << matrix_rel << "\"}\n";
    }
    if (!manifest) throw io_error("short write to cohort manifest under '" + out_dir + "'");

    if (frame_participants <= 0) return;
    std::ofstream frames_manifest(fs::path(out_dir) / "emotion_frames.csv");
    if (!frames_manifest) throw io_error("cannot create frame manifest under '" + out_dir + "'");
    std::mt19937 rng(0x5eedf00d);
    const int count = std::min<int>(frame_participants, static_cast<int>(cohort.records.size()));
    for (int i = 0; i < count; ++i) {
        const ParticipantRecord& record = cohort.records[i];
        const fs::path dir = fs::path(out_dir) / "frames" / record.id;
        fs::create_directories(dir);
        const int frames = std::min(frames_per_participant, cohort.matrices[i].frames());
        for (int f = 0; f < frames; ++f) {
            const int emotion = cohort.matrices[i].argmax(f);
            char name[16];
            std::snprintf(name, sizeof(name), "f%04d.pgm", f + 1);
            const fs::path file = dir / name;
            save_pgm(synth_frame(emotion, f, rng), file.string());
            frames_manifest << "frames/" << record.id << "/" << name << ","
                            << emotion_name(emotion) << "\n";
        }
    }
}

}  // namespace emoscreen
