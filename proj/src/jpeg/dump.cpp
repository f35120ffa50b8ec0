#include <sstream>

#include "cdbin/jpeg/codec.hpp"

namespace cdbin::jpeg {

std::string writeCoeffDump(const DecodedCoefficients& coeffs) {
    std::ostringstream out;
    out << "# cdbin-coeff-dump v1\n";
    out << "# size " << coeffs.width << " " << coeffs.height << "\n";
    out << "# components " << coeffs.components.size() << "\n";
    for (std::size_t c = 0; c < coeffs.components.size(); ++c) {
        const CoefficientTensor& t = coeffs.components[c];
        out << "# component " << c << " id " << t.componentId << " blocks " << t.blocksHigh << " "
            << t.blocksWide << "\n";
        out << "# quant " << c;
        for (int z = 0; z < kBlockSize; ++z) out << " " << t.table.zigzag[z];
        out << "\n";
    }
    for (std::size_t c = 0; c < coeffs.components.size(); ++c) {
        const CoefficientTensor& t = coeffs.components[c];
        for (int br = 0; br < t.blocksHigh; ++br)
            for (int bc = 0; bc < t.blocksWide; ++bc) {
                out << c << " " << br << " " << bc;
                for (std::int16_t v : t.block(br, bc)) out << " " << v;
                out << "\n";
            }
    }
    return out.str();
}

DecodedCoefficients parseCoeffDump(const std::string& text) {
    DecodedCoefficients coeffs;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "size") {
                ls >> coeffs.width >> coeffs.height;
            } else if (key == "components") {
                std::size_t n;
                ls >> n;
                coeffs.components.resize(n);
            } else if (key == "component") {
                std::size_t idx;
                std::string idWord, blocksWord;
                ls >> idx >> idWord;
                if (idx >= coeffs.components.size()) throw Error("coeff dump: bad component index");
                CoefficientTensor& t = coeffs.components[idx];
                ls >> t.componentId >> blocksWord >> t.blocksHigh >> t.blocksWide;
                t.blocks.assign(static_cast<std::size_t>(t.blocksHigh) * t.blocksWide, CoeffBlock{});
            } else if (key == "quant") {
                std::size_t idx;
                ls >> idx;
                if (idx >= coeffs.components.size()) throw Error("coeff dump: bad quant index");
                QuantTable& q = coeffs.components[idx].table;
                q.kind = idx == 0 ? TableKind::Luminance : TableKind::Chrominance;
                for (int z = 0; z < kBlockSize; ++z) ls >> q.zigzag[z];
            }
            // other comment lines are ignored
            continue;
        }
        std::size_t c;
        int br, bc;
        ls >> c >> br >> bc;
        if (!ls || c >= coeffs.components.size()) throw Error("coeff dump: malformed block line");
        CoefficientTensor& t = coeffs.components[c];
        if (br < 0 || br >= t.blocksHigh || bc < 0 || bc >= t.blocksWide)
            throw Error("coeff dump: block coordinates out of range");
        CoeffBlock& b = t.block(br, bc);
        for (int i = 0; i < kBlockSize; ++i) {
            int v;
            ls >> v;
            if (!ls) throw Error("coeff dump: block line with fewer than 64 values");
            b[i] = static_cast<std::int16_t>(v);
        }
    }
    return coeffs;
}

} // namespace cdbin::jpeg
