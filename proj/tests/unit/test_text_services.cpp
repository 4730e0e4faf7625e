#include <doctest.h>

#include <fstream>

#include "harness.hpp"
#include "lpar/orchestrate/text_services.hpp"
#include "oracles.hpp"

using namespace lpar::orchestrate;

TEST_CASE("luhn agrees with the oracle") {
    CHECK(luhn_valid("4111111111111111"));
    CHECK(luhn_valid("4111 1111 1111 1111"));
    CHECK_FALSE(luhn_valid("4111111111111112"));
    harness::Gen gen(41);
    for (int i = 0; i < 500; ++i) {
        std::string digits;
        const int n = gen.integer(1, 19);
        for (int d = 0; d < n; ++d) digits.push_back(static_cast<char>('0' + gen.integer(0, 9)));
        CHECK(luhn_valid(digits) == oracle::luhn(digits));
    }
}

TEST_CASE("pii_redact examples") {
    auto r = pii_redact("email jo.smith+x@mail.example.org please");
    CHECK(r.redacted == "email [REDACTED:email] please");
    CHECK(r.findings == std::vector<PiiKind>{PiiKind::email});

    r = pii_redact("my card is 4111-1111-1111-1111.");
    CHECK(r.redacted == "my card is [REDACTED:card].");
    CHECK(r.findings == std::vector<PiiKind>{PiiKind::card});

    // Long enough for a card but fails Luhn: treated as a phone number.
    r = pii_redact("4111 1111 1111 1112");
    CHECK(r.redacted == "[REDACTED:phone]");

    r = pii_redact("call (020) 7946-0018 or x@y.io");
    CHECK(r.redacted == "call [REDACTED:phone] or [REDACTED:email]");
    CHECK(r.findings == std::vector<PiiKind>{PiiKind::phone, PiiKind::email});

    // Short numbers such as amounts and account numbers stay.
    CHECK(pii_redact("pay 120 from 123456").redacted == "pay 120 from 123456");
    CHECK(pii_redact("nothing here").findings.empty());
}

TEST_CASE("property: redaction is idempotent") {
    harness::Gen gen(42);
    const std::vector<std::string> pieces = {"hello", "4111 1111 1111 1111", "a@b.co", "0207 946 0018", "120", "-", "(", ")",
                                             "bill", "5555555555554444", "12345678"};
    for (int i = 0; i < 300; ++i) {
        std::string text;
        const int n = gen.integer(1, 8);
        for (int p = 0; p < n; ++p) text += gen.pick(pieces) + (gen.chance(0.7) ? " " : "");
        const auto once = pii_redact(text).redacted;
        CHECK(pii_redact(once).redacted == once);
        CHECK(pii_redact(once).findings.empty());
    }
}

TEST_CASE("profanity filter masks whole words case-insensitively") {
    const std::set<std::string> words{"darn", "heck"};
    auto r = profanity_filter("Oh DARN it, heckler", words);
    CHECK(r.clean_text == "Oh **** it, heckler");
    CHECK(r.flagged);
    CHECK_FALSE(profanity_filter("all fine", words).flagged);
}

TEST_CASE("sentiment examples") {
    const auto lex = Lexicons::defaults();
    CHECK(sentiment_score("this is terrible and awful", lex) == -1.0);
    CHECK(sentiment_score("great, thanks", lex) == 1.0);
    CHECK(sentiment_score("what is my balance", lex) == 0.0);
    // 2 positive, 3 negative.
    CHECK(sentiment_score("good great but bad awful terrible", lex) == doctest::Approx(-0.2));
    CHECK(sentiment_score("bad bad good", lex) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("word lists skip comments and blanks") {
    const auto dir = harness::scratch_dir("words");
    {
        std::ofstream out(dir / "w.txt");
        out << "# header\n\nAlpha\n beta \n";
    }
    CHECK(load_word_list(dir / "w.txt") == std::set<std::string>{"alpha", "beta"});
    std::filesystem::remove_all(dir);
}
