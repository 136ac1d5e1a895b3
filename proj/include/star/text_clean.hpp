#pragma once

#include <string>

namespace star {

// Social-media scrubbing rules. URLs become url_token, @-mentions become
// mention_token, everything else is copied byte for byte. The matchers are
// fixed scanners rather than configurable regexes so cleaning is identical
// on every platform:
//   - a URL is "http://", "https://" or "www." at a word boundary plus the
//     run of non-whitespace after it;
//   - a mention is '@' at a word boundary followed by at least one of
//     [A-Za-z0-9_], consuming that run.
// clean_text is idempotent as long as the replacement tokens contain no '@'
// and no URL prefix, which the defaults satisfy.
struct CleaningRules {
  bool replace_urls = true;
  bool replace_mentions = true;
  std::string url_token = "<h>";
  std::string mention_token = "<u>";
};

std::string clean_text(const std::string& raw, const CleaningRules& rules);

}  // namespace star
