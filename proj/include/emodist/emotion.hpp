#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace emodist {

/// The four canonical emotions every source label scheme is mapped onto.
/// Ordinal order is fixed and used for all deterministic tie-breaks.
enum class Emotion : std::uint8_t { anger = 0, joy = 1, sadness = 2, surprise = 3 };

inline constexpr std::size_t kNumEmotions = 4;
inline constexpr std::array<Emotion, kNumEmotions> kEmotions = {Emotion::anger, Emotion::joy, Emotion::sadness,
                                                                Emotion::surprise};

constexpr std::size_t ordinal(Emotion e) noexcept { return static_cast<std::size_t>(e); }

std::string_view to_string(Emotion e) noexcept;

/// Parses a canonical emotion name (case-insensitive). Returns nullopt for
/// anything else, including source labels such as "fear".
std::optional<Emotion> parse_emotion(std::string_view name) noexcept;

/// Source label schemes.
enum class Scheme { facebook, affective, fairy_tales, isear };

std::string_view to_string(Scheme s) noexcept;
std::optional<Scheme> parse_scheme(std::string_view name) noexcept;

/// One row of a scheme's mapping table; `target == nullopt` means the raw
/// label is dropped.
struct SchemeEntry {
  std::string_view raw;
  std::optional<Emotion> target;
};

/// Every raw label of a scheme with its canonical target.
std::span<const SchemeEntry> scheme_table(Scheme s) noexcept;

/// Maps a raw label (case-insensitive) through a scheme. Returns nullopt when
/// the label is dropped; throws DataError when the label is not part of the
/// scheme.
std::optional<Emotion> map_source_label(Scheme s, std::string_view raw);

}  // namespace emodist
