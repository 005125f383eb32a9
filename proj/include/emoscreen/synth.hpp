#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emoscreen/analytics.hpp"
#include "emoscreen/pipeline.hpp"

namespace emoscreen {

// Scripted synthetic screening cohort. Group emission patterns: impaired
// participants show an anger burst around frames 200-250 and less happiness
// overall; healthy participants show a sadness bump around frames 220-280.
// `noise` in [0, 1] mixes each group's per-frame distribution toward the
// pooled mean (0 = maximally separated, 1 = indistinguishable groups).
struct SynthParams {
    int healthy = 25;
    int impaired = 36;
    int frames = 320;
    double noise = 0.0;
    std::uint32_t seed = kDefaultSeed;
};

struct SynthCohort {
    std::vector<ParticipantRecord> records;  // id, moca, group (no paths)
    std::vector<EvolutionMatrix> matrices;   // one-hot columns

    std::vector<Group> groups() const;
};

SynthCohort generate_synthetic_cohort(const SynthParams& params);

// Writes cohort.jsonl plus matrices/<id>.csv under out_dir. When
// frame_participants > 0, the first K participants additionally get
// frames/<id>/ directories of PGM frames with a planted bright-square face
// whose brightness encodes the scripted emotion ("other" frames carry no
// square so the no-face policy kicks in), plus an emotion_frames.csv manifest
// labeling every emitted frame.
void write_synthetic_cohort(const SynthCohort& cohort, const std::string& out_dir,
                            int frame_participants = 0, int frames_per_participant = 12);

}  // namespace emoscreen
