#pragma once

#include <string>
#include <vector>

#include "tolerances.hpp"

namespace siegelort {

// Freely reduced word in the generators of a free group. Letters are
// +-(index + 1): 'a' = 1, 'a^{-1}' = -1, 'b' = 2, ...
struct FreeWord {
    std::vector<int> letters;

    FreeWord() = default;
    explicit FreeWord(std::vector<int> raw) {
        for (int l : raw) push(l);
    }

    void push(int letter) {
        if (letter == 0) throw domain_error("free word: zero letter");
        if (!letters.empty() && letters.back() == -letter)
            letters.pop_back();
        else
            letters.push_back(letter);
    }

    bool empty() const { return letters.empty(); }
    int length() const { return static_cast<int>(letters.size()); }

    FreeWord inverse() const {
        FreeWord w;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.push(-*it);
        return w;
    }

    FreeWord operator*(const FreeWord& o) const {
        FreeWord w = *this;
        for (int l : o.letters) w.push(l);
        return w;
    }

    bool operator==(const FreeWord& o) const { return letters == o.letters; }

    // 'a'..'z' for generators, uppercase for inverses.
    std::string str() const {
        if (letters.empty()) return "1";
        std::string s;
        for (int l : letters) {
            char base = static_cast<char>('a' + std::abs(l) - 1);
            s += (l > 0) ? base : static_cast<char>(base - 'a' + 'A');
        }
        return s;
    }

    static FreeWord parse(const std::string& s) {
        FreeWord w;
        if (s == "1" || s.empty()) return w;
        for (char c : s) {
            if (c >= 'a' && c <= 'z')
                w.push(c - 'a' + 1);
            else if (c >= 'A' && c <= 'Z')
                w.push(-(c - 'A' + 1));
            else
                throw domain_error(std::string("free word: bad character '") + c + "'");
        }
        return w;
    }
};

// Marked pair of pants: free group on gamma1, gamma2 with peripherals
// gamma0 = (gamma1 gamma2)^{-1}, gamma1, gamma2, oriented so the surface
// lies to the right of each boundary component.
struct SurfaceSpec {
    int generators = 2;
    std::vector<FreeWord> peripherals;

    static SurfaceSpec pair_of_pants() {
        SurfaceSpec s;
        FreeWord g1(std::vector<int>{1}), g2(std::vector<int>{2});
        s.peripherals = {(g1 * g2).inverse(), g1, g2};
        // product relation gamma0 gamma1 gamma2 = 1 as reduced words
        if (!(s.peripherals[0] * g1 * g2).empty())
            throw domain_error("surface spec: boundary relation violated");
        return s;
    }

    bool operator==(const SurfaceSpec& o) const {
        return generators == o.generators && peripherals == o.peripherals;
    }
};

} // namespace siegelort
