#include "lculab/rational.hpp"

#include <cctype>
#include <sstream>

namespace lculab {

BigRational rational_from_string(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator: " + text);
        if (den < 0) { num = -num; den = -den; }
        return BigRational(num, den);
    }

    // strip leading zeros before handing to BigInt (a leading 0 reads as octal)
    auto parse_decimal = [&](std::string digits) {
        bool negative = false;
        if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
            negative = digits[0] == '-';
            digits.erase(digits.begin());
        }
        std::size_t first = digits.find_first_not_of('0');
        digits = first == std::string::npos ? "0" : digits.substr(first);
        BigInt v(digits);
        return negative ? BigInt(-v) : v;
    };

    auto dot = s.find('.');
    if (dot == std::string::npos) return BigRational(parse_decimal(s));

    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac_len = s.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+")
        throw std::invalid_argument("bad rational literal: " + text);
    BigInt den(1);
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    return BigRational(parse_decimal(digits), den);
}

std::vector<BigRational> rationals_from_csv(const std::string& text) {
    std::vector<BigRational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(rational_from_string(item));
    return out;
}

}  // namespace lculab
