from gibbsbound.fixtures import fixture_bytes, load_registry, verify_fixtures


def test_registry_lists_all_fixtures_with_origins():
    registry = load_registry()
    assert set(registry) == {
        "two_hypothesis.txt",
        "idx_images.bin",
        "cifar_records.bin",
        "kl_table.txt",
    }
    for entry in registry.values():
        assert entry["origin"] in ("closed_form", "hand_built_bytes", "direct_formula")
        assert entry["expectations"]


def test_fixture_payloads_present():
    assert len(fixture_bytes("idx_images.bin")) == 24
    assert len(fixture_bytes("idx_labels.bin")) == 10
    assert len(fixture_bytes("cifar_records.bin")) == 2 * 3073


def test_verify_fixtures_passes():
    assert verify_fixtures() == []
