"""RSA tests.  The toy-key vectors were computed with an independent
extended-Euclid / pow oracle before the implementation existed:

    p=61 q=53 e=17  ->  n=3233, phi=3120, d = 17^-1 mod 3120 = 2753
    encrypt block:      65^17   mod 3233 = 2790
    sign block 0x0141:  321^2753 mod 3233 = 850
"""

import random

import pytest

from nmlite import security, wire
from nmlite.security import (BadBlockLength, BadKeyFile,
                             MissingPrivateExponent, RsaKeyPair,
                             SentinelMismatch, apply_block, decrypt, encrypt,
                             generate_keypair, load_key_file, save_key_file,
                             sign, sign_message, verify_recover,
                             verify_signed_message)

TOY = RsaKeyPair.from_primes(61, 53, 17)


class TestToyVectors:
    def test_key_material(self):
        assert TOY.n == 3233
        assert TOY.d == 2753
        assert TOY.k == 2

    def test_encrypt_block_65(self):
        assert apply_block(65, TOY.e, TOY.n) == 2790
        assert apply_block(2790, TOY.d, TOY.n) == 65

    def test_sign_single_byte(self):
        signature = sign(b"\x41", TOY)
        assert int.from_bytes(signature, "big") == 850
        assert verify_recover(signature, TOY) == b"\x41"

    def test_empty_message_empty_signature(self):
        assert sign(b"", TOY) == b""
        assert verify_recover(b"", TOY) == b""
        assert encrypt(b"", TOY) == b""
        assert decrypt(b"", TOY) == b""

    def test_lambda_invariant(self):
        # e*d == 1 (mod lcm(p-1, q-1))
        lam = 780  # lcm(60, 52)
        assert (TOY.e * TOY.d) % lam == 1


class TestKeyGeneration:
    def test_deterministic_with_seed(self):
        a = generate_keypair(512, seed=42)
        b = generate_keypair(512, seed=42)
        assert (a.n, a.e, a.d) == (b.n, b.e, b.d)
        assert generate_keypair(512, seed=43).n != a.n

    def test_modulus_size_exact(self):
        for bits in (512, 1024):
            key = generate_keypair(bits, seed=1)
            assert key.n.bit_length() == bits
            assert key.k == bits // 8

    def test_exponentiation_identity(self):
        # oracle: (m^e)^d == m mod n for random m
        key = generate_keypair(512, seed=5)
        rng = random.Random(5)
        for _ in range(100):
            m = rng.randrange(2, key.n - 1)
            assert pow(pow(m, key.e, key.n), key.d, key.n) == m

    def test_rejects_odd_sizes(self):
        with pytest.raises(ValueError):
            generate_keypair(768)


class TestRoundTrips:
    @pytest.mark.parametrize("bits,seed", [(512, 10), (1024, 11)])
    def test_sign_verify_and_encrypt_decrypt(self, bits, seed):
        key = generate_keypair(bits, seed=seed)
        rng = random.Random(seed)
        for _ in range(25):
            message = bytes(rng.randrange(256)
                            for _ in range(rng.randrange(0, 4096)))
            assert verify_recover(sign(message, key), key) == message
            assert decrypt(encrypt(message, key), key) == message

    def test_block_boundary_lengths(self):
        key = generate_keypair(512, seed=77)
        for length in (0, 1, key.k - 2, key.k - 1, key.k, 2 * (key.k - 1),
                       2 * (key.k - 1) + 1):
            message = bytes(range(256))[:length]
            assert verify_recover(sign(message, key), key) == message

    def test_leading_zero_bytes_survive(self):
        key = generate_keypair(512, seed=78)
        message = b"\x00\x00\x01data with leading zeros\x00"
        assert verify_recover(sign(message, key), key) == message


class TestTampering:
    def test_every_single_bit_flip_detected(self):
        key = generate_keypair(512, seed=55)
        rng = random.Random(55)
        message = b"integrity protected request body"
        signature = sign(message, key)
        for _ in range(100):
            corrupted = bytearray(signature)
            position = rng.randrange(len(corrupted))
            corrupted[position] ^= 1 << rng.randrange(8)
            try:
                recovered = verify_recover(bytes(corrupted), key)
            except SentinelMismatch:
                continue  # detected structurally
            assert recovered != message  # detected by caller comparison

    def test_bad_block_length(self):
        key = generate_keypair(512, seed=56)
        with pytest.raises(BadBlockLength):
            verify_recover(b"\x01" * (key.k + 1), key)

    def test_private_exponent_required(self):
        key = generate_keypair(512, seed=57).public_only()
        with pytest.raises(MissingPrivateExponent):
            sign(b"x", key)
        with pytest.raises(MissingPrivateExponent):
            decrypt(b"\x00" * key.k, key)


class TestKeyFiles:
    def test_round_trip(self, tmp_path):
        key = generate_keypair(512, seed=60)
        path = str(tmp_path / "manager.key")
        save_key_file(key, path)
        loaded = load_key_file(path)
        assert (loaded.n, loaded.e, loaded.d) == (key.n, key.e, key.d)

    def test_public_only_file(self, tmp_path):
        key = generate_keypair(512, seed=61)
        path = str(tmp_path / "agent.key")
        save_key_file(key, path, include_private=False)
        loaded = load_key_file(path)
        assert loaded.d is None
        assert loaded.n == key.n

    def test_bad_files(self, tmp_path):
        cases = ["nonsense", "n=12\nq=5", "n=abc\ne=3", "e=3"]
        for i, content in enumerate(cases):
            path = tmp_path / f"bad{i}.key"
            path.write_text(content + "\n")
            with pytest.raises(BadKeyFile):
                load_key_file(str(path))
        with pytest.raises(BadKeyFile):
            load_key_file(str(tmp_path / "missing.key"))


class TestMessageSigning:
    def test_sign_and_verify_message(self):
        key = generate_keypair(512, seed=70)
        message = wire.make_message(wire.MessageType.GET,
                                    ["public", "1.3.6.1.2.1.1.1.0"],
                                    correlation_id=7)
        signed = sign_message(message, key)
        assert signed.signed
        assert len(signed.fields) == len(message.fields) + 1
        assert verify_signed_message(signed, key.public_only())

    def test_tampered_message_rejected(self):
        key = generate_keypair(512, seed=71)
        signed = sign_message(
            wire.make_message(wire.MessageType.SET,
                              ["public", "1.3.6.1.2.1.1.5.0", "evil"]),
            key)
        tampered = wire.Message(
            type=signed.type, flags=signed.flags,
            fields=[signed.fields[0], signed.fields[1], b"other",
                    signed.fields[3]],
            correlation_id=signed.correlation_id)
        assert not verify_signed_message(tampered, key)

    def test_unsigned_message_rejected(self):
        key = generate_keypair(512, seed=72)
        message = wire.make_message(wire.MessageType.GET, ["public", "1.3"])
        assert not verify_signed_message(message, key)
