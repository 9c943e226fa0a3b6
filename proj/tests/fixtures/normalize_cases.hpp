// Hand-written normalization fixtures; tokens is the token count of the
// expected text.
#ifndef TYPICLASS_NORMALIZE_CASES_HPP
#define TYPICLASS_NORMALIZE_CASES_HPP

#include <cstddef>

namespace typiclass::testing {

struct NormalizeCase {
  const char* raw;
  const char* expected;
  std::size_t tokens;
};

inline constexpr NormalizeCase kNormalizeCases[] = {
    {"RT @usr check https://t.co/x now", "MENTION check URL now", 4},
    {"", "", 0},
    {"please call 010-1234-5678 today or tomorrow", "please call NUMBER today or tomorrow", 6},
    {"RT: @news_kr 2016-08-19 12:30 Breaking report", "MENTION Breaking report", 3},
    {"see http://example.com/a?b=1 and www.naver.com too", "see URL and URL too", 5},
    {"email me at someone@example.com", "email me at someone@example.com", 4},
    {"hotline 1577-0199 open", "hotline NUMBER open", 3},
    {"intl +82 10 1234 5678 line", "intl NUMBER line", 3},
    {"office (02) 123-4567 hours", "office NUMBER hours", 3},
    {"posted at 9:05 PM yesterday evening again", "posted at yesterday evening again", 5},
    {"time 23:59:59 exactly", "time exactly", 2},
    {"  leading and   trailing   spaces  kept  ", "leading and trailing spaces kept", 5},
    {"RT RT RT spam spam", "spam spam", 2},
    {"not RT in middle RT here", "not RT in middle RT here", 6},
    {"ratio 3:2 score", "ratio 3:2 score", 3},
    {"\xEC\x9E\x90\xEC\x82\xB4 \xEC\x98\x88\xEB\xB0\xA9 1393", "\xEC\x9E\x90\xEC\x82\xB4 \xEC\x98\x88\xEB\xB0\xA9 1393", 3},
    {"ideographic\xE3\x80\x80space\xC2\xA0nbsp", "ideographic space nbsp", 3},
    {"HTTPS://T.CO/ABC upper", "URL upper", 2},
    {"order 12345678901234 id", "order 12345678901234 id", 3},
    {"@user_name: thanks! 2016/08/19", "MENTION: thanks!", 2},
};

}  // namespace typiclass::testing

#endif  // TYPICLASS_NORMALIZE_CASES_HPP
