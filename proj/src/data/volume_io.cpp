#include "taskaug/data/volume_io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "taskaug/core/errors.hpp"

namespace taskaug::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'T', 'A', 'V', 'O', 'L', '1', '\n', '\0'};
}

void save_volume(const VolumeRecord& rec, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    json header = {
        {"subject_id", rec.subject_id},
        {"group", rec.group},
        {"dims", {rec.depth(), rec.height(), rec.width()}},
        {"in_plane_spacing", {rec.in_plane_spacing[0], rec.in_plane_spacing[1]}},
        {"slice_thickness", rec.slice_thickness},
        {"image_dtype", "float32"},
        {"label_dtype", "uint8"},
    };
    const std::string hs = header.dump();
    const std::uint64_t hlen = hs.size();
    os.write(kMagic, 8);
    os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    os.write(reinterpret_cast<const char*>(rec.image.data()),
             static_cast<std::streamsize>(rec.image.size() * sizeof(float)));
    os.write(reinterpret_cast<const char*>(rec.labels.values.data()),
             static_cast<std::streamsize>(rec.labels.values.size()));
    if (!os) throw IoError("short write on " + path);
}

VolumeRecord load_volume(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad magic in " + path);
    std::uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    const json header = json::parse(hs);

    VolumeRecord rec;
    rec.subject_id = header.at("subject_id").get<std::string>();
    rec.group = header.at("group").get<std::string>();
    const auto dims = header.at("dims");
    const int d = dims[0], h = dims[1], w = dims[2];
    rec.in_plane_spacing = {header.at("in_plane_spacing")[0].get<double>(),
                            header.at("in_plane_spacing")[1].get<double>()};
    rec.slice_thickness = header.at("slice_thickness").get<double>();
    rec.image = Tensor({d, h, w});
    rec.labels = LabelVolume(d, h, w);
    is.read(reinterpret_cast<char*>(rec.image.data()),
            static_cast<std::streamsize>(rec.image.size() * sizeof(float)));
    is.read(reinterpret_cast<char*>(rec.labels.values.data()),
            static_cast<std::streamsize>(rec.labels.values.size()));
    if (!is) throw IoError("truncated volume file " + path);
    return rec;
}

std::vector<VolumeRecord> load_volume_dir(const std::string& dir) {
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".tav") paths.push_back(e.path().string());
    std::sort(paths.begin(), paths.end());
    std::vector<VolumeRecord> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(load_volume(p));
    return out;
}

void save_volume_dir(const std::vector<VolumeRecord>& records, const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& rec : records) save_volume(rec, (fs::path(dir) / (rec.subject_id + ".tav")).string());
}

// ---------------------------------------------------------------------------
// Minimal NIfTI-1

namespace {

#pragma pack(push, 1)
struct NiftiHeader {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code, sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must be 348 bytes");

enum NiftiType : std::int16_t {
    kUint8 = 2,
    kInt16 = 4,
    kInt32 = 8,
    kFloat32 = 16,
    kFloat64 = 64,
    kUint16 = 512,
};

template <typename T>
void convert(const std::vector<char>& raw, Tensor& out) {
    const T* p = reinterpret_cast<const T*>(raw.data());
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(p[i]);
}

}  // namespace

Tensor read_nifti(const std::string& path, std::array<double, 3>& spacing_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path);
    NiftiHeader hdr{};
    is.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
    if (!is || hdr.sizeof_hdr != 348) throw IoError("not an uncompressed NIfTI-1 file: " + path);
    if (std::strncmp(hdr.magic, "n+1", 3) != 0 && std::strncmp(hdr.magic, "ni1", 3) != 0)
        throw IoError("bad NIfTI magic in " + path);
    const int ndim = hdr.dim[0];
    if (ndim < 1 || ndim > 3) throw IoError("only 1..3 dimensional NIfTI supported: " + path);
    const int nx = hdr.dim[1];
    const int ny = ndim >= 2 ? hdr.dim[2] : 1;
    const int nz = ndim >= 3 ? hdr.dim[3] : 1;
    spacing_out = {hdr.pixdim[1], hdr.pixdim[2], ndim >= 3 ? hdr.pixdim[3] : 1.0f};

    const std::int64_t n = static_cast<std::int64_t>(nx) * ny * nz;
    const int bytes = hdr.bitpix / 8;
    is.seekg(static_cast<std::streamoff>(hdr.vox_offset), std::ios::beg);
    std::vector<char> raw(static_cast<size_t>(n) * bytes);
    is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!is) throw IoError("truncated NIfTI data in " + path);

    // NIfTI stores x fastest; our volume layout is (z,y,x).
    Tensor vol({nz, ny, nx});
    switch (hdr.datatype) {
        case kUint8: convert<std::uint8_t>(raw, vol); break;
        case kInt16: convert<std::int16_t>(raw, vol); break;
        case kInt32: convert<std::int32_t>(raw, vol); break;
        case kFloat32: convert<float>(raw, vol); break;
        case kFloat64: convert<double>(raw, vol); break;
        case kUint16: convert<std::uint16_t>(raw, vol); break;
        default: throw IoError("unsupported NIfTI datatype " + std::to_string(hdr.datatype));
    }
    if (hdr.scl_slope != 0.0f && !(hdr.scl_slope == 1.0f && hdr.scl_inter == 0.0f))
        for (std::int64_t i = 0; i < vol.size(); ++i)
            vol[i] = vol[i] * hdr.scl_slope + hdr.scl_inter;
    return vol;
}

std::vector<VolumeRecord> ingest_nifti_dir(const std::string& input_dir,
                                           const std::string& phase) {
    std::ifstream groups(fs::path(input_dir) / "groups.txt");
    if (!groups) throw IoError("cannot read " + input_dir + "/groups.txt");
    std::vector<VolumeRecord> records;
    std::string id, group;
    while (groups >> id >> group) {
        const std::string img_path =
            (fs::path(input_dir) / (id + "_" + phase + "_image.nii")).string();
        const std::string lbl_path =
            (fs::path(input_dir) / (id + "_" + phase + "_label.nii")).string();
        std::array<double, 3> sp_img{}, sp_lbl{};
        VolumeRecord rec;
        rec.subject_id = id;
        rec.group = group;
        rec.image = read_nifti(img_path, sp_img);
        Tensor lbl = read_nifti(lbl_path, sp_lbl);
        if (!lbl.same_shape(rec.image))
            throw ShapeMismatch("image/label shape differ for subject " + id);
        rec.labels = LabelVolume(lbl.dim(0), lbl.dim(1), lbl.dim(2));
        for (std::int64_t i = 0; i < lbl.size(); ++i)
            rec.labels.values[static_cast<size_t>(i)] = static_cast<std::uint8_t>(lbl[i]);
        rec.in_plane_spacing = {sp_img[0], sp_img[1]};
        rec.slice_thickness = sp_img[2];
        validate_record(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

void write_nifti(const Tensor& volume, const std::array<double, 3>& spacing,
                 const std::string& path) {
    if (volume.rank() != 3) throw ShapeMismatch("write_nifti expects (D,H,W)");
    NiftiHeader hdr{};
    hdr.sizeof_hdr = 348;
    hdr.dim[0] = 3;
    hdr.dim[1] = static_cast<std::int16_t>(volume.dim(2));
    hdr.dim[2] = static_cast<std::int16_t>(volume.dim(1));
    hdr.dim[3] = static_cast<std::int16_t>(volume.dim(0));
    for (int i = 4; i < 8; ++i) hdr.dim[i] = 1;
    hdr.datatype = kFloat32;
    hdr.bitpix = 32;
    hdr.pixdim[0] = 1.0f;
    hdr.pixdim[1] = static_cast<float>(spacing[0]);
    hdr.pixdim[2] = static_cast<float>(spacing[1]);
    hdr.pixdim[3] = static_cast<float>(spacing[2]);
    hdr.vox_offset = 352.0f;
    hdr.scl_slope = 1.0f;
    hdr.magic[0] = 'n';
    hdr.magic[1] = '+';
    hdr.magic[2] = '1';

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
    const char pad[4] = {0, 0, 0, 0};
    os.write(pad, 4);
    os.write(reinterpret_cast<const char*>(volume.data()),
             static_cast<std::streamsize>(volume.size() * sizeof(float)));
    if (!os) throw IoError("short write on " + path);
}

}  // namespace taskaug::data
