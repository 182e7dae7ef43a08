"""Channel-code primitives: CRC, convolutional codes, code sets and P_e tables."""
from .codeset import CodeSet, IdealCode, decode, default_rcpc, encode, encoded_length, format_rate, load_code_set, parse_rate, save_code_set
from .conv import ConvCodeSpec, conv_encode, depuncture, encoder_states, rcpc_family, viterbi_decode
from .crc import CCITT, DEFAULT_CRC, PRINTED, CrcSpec, crc_append, crc_check, crc_check_rows, crc_word
from .pe import PeEntry, PeTable, estimate_pe, pe_lookup, read_pe_csv, write_pe_csv
