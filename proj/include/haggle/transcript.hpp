#pragma once

// JSON-lines transcript records. One record per run, one line per record.
// Schema documented in docs/results-format.md.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "haggle/runner.hpp"

namespace haggle {

inline constexpr std::string_view kTranscriptSchema = "haggle.transcript/1";

// Single line, no trailing newline. Money is written as decimal strings.
std::string transcript_to_json(const NegotiationRun& run);

// Throws DataError on malformed records.
NegotiationRun transcript_from_json(std::string_view line);

void write_transcript(const std::filesystem::path& path, const NegotiationRun& run);
// Reads every record in a JSON-lines file.
std::vector<NegotiationRun> read_transcripts(const std::filesystem::path& path);

}  // namespace haggle
