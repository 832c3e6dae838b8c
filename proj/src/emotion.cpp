#include "emodist/emotion.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "emodist/error.hpp"

namespace emodist {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

constexpr auto A = Emotion::anger;
constexpr auto J = Emotion::joy;
constexpr auto S = Emotion::sadness;
constexpr auto U = Emotion::surprise;
constexpr std::optional<Emotion> kDropped;

constexpr SchemeEntry kFacebook[] = {
    {"like", kDropped}, {"love", J},    {"haha", J},           {"wow", U},
    {"sad", S},         {"angry", A},   {"thankful", kDropped},
};

constexpr SchemeEntry kAffective[] = {
    {"anger", A}, {"disgust", A}, {"fear", kDropped}, {"joy", J}, {"sadness", S}, {"surprise", U},
};

// Angry and disgusted are merged into a single class before mapping.
constexpr SchemeEntry kFairyTales[] = {
    {"angry-disgusted", A}, {"angry", A}, {"disgusted", A}, {"fearful", kDropped},
    {"happy", J},           {"sad", S},   {"surprised", U},
};

constexpr SchemeEntry kIsear[] = {
    {"anger", A},   {"disgust", A},        {"fear", kDropped},  {"joy", J},
    {"sadness", S}, {"shame", kDropped},   {"guilt", kDropped},
};

}  // namespace

std::string_view to_string(Emotion e) noexcept {
  switch (e) {
    case Emotion::anger:
      return "anger";
    case Emotion::joy:
      return "joy";
    case Emotion::sadness:
      return "sadness";
    case Emotion::surprise:
      return "surprise";
  }
  return "?";
}

std::optional<Emotion> parse_emotion(std::string_view name) noexcept {
  for (Emotion e : kEmotions) {
    if (iequals(name, to_string(e))) return e;
  }
  return std::nullopt;
}

std::string_view to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::facebook:
      return "facebook";
    case Scheme::affective:
      return "affective";
    case Scheme::fairy_tales:
      return "fairy_tales";
    case Scheme::isear:
      return "isear";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) noexcept {
  for (Scheme s : {Scheme::facebook, Scheme::affective, Scheme::fairy_tales, Scheme::isear}) {
    if (iequals(name, to_string(s))) return s;
  }
  return std::nullopt;
}

std::span<const SchemeEntry> scheme_table(Scheme s) noexcept {
  switch (s) {
    case Scheme::facebook:
      return kFacebook;
    case Scheme::affective:
      return kAffective;
    case Scheme::fairy_tales:
      return kFairyTales;
    case Scheme::isear:
      return kIsear;
  }
  return {};
}

std::optional<Emotion> map_source_label(Scheme s, std::string_view raw) {
  for (const auto& entry : scheme_table(s)) {
    if (iequals(entry.raw, raw)) return entry.target;
  }
  throw DataError("unknown " + std::string(to_string(s)) + " label '" + std::string(raw) + "'");
}

}  // namespace emodist
