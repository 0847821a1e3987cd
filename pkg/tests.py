# tests.py
# Menú de pruebas del toolkit de plaquetas
import sys
import unittest

from test_cli import TestCommands, TestSettings, TestUsageErrors
from test_correlators import TestMultispinInfinite, TestMultispinPlus
from test_f2cycles import TestCycleBases, TestGF2, TestHighTemperature, TestPlusBoundaryCycles, TestStaircase
from test_geometry import TestGeometry, TestShadows
from test_gibbs_exact import TestFlipIdentities, TestMixingQuantities, TestPartitionFunction
from test_lengths import TestCavityAndMixing, TestMultispinLength, TestRenormLength, TestScaling
from test_magnetization import TestClosedForm, TestDecayScan
from test_mcmc import TestBatchMeans, TestChains, TestDetailedBalance, TestLattice
from test_renorm import TestBetaPrime, TestDecimation, TestFlipMaps, TestRenormalizedPlaquettes

GROUPS = [
    ("Geometría y sombras", [TestGeometry, TestShadows]),
    ("Enumeración exacta de Gibbs", [TestPartitionFunction, TestFlipIdentities, TestMixingQuantities]),
    ("Ciclos sobre F2", [TestGF2, TestCycleBases, TestHighTemperature, TestStaircase, TestPlusBoundaryCycles]),
    ("Correladores multispín", [TestMultispinInfinite, TestMultispinPlus]),
    ("Renormalización", [TestBetaPrime, TestRenormalizedPlaquettes, TestDecimation, TestFlipMaps]),
    ("Magnetización", [TestClosedForm, TestDecayScan]),
    ("Monte Carlo", [TestLattice, TestBatchMeans, TestChains, TestDetailedBalance]),
    ("Longitudes críticas", [TestMultispinLength, TestRenormLength, TestScaling, TestCavityAndMixing]),
    ("Línea de comandos y configuración", [TestCommands, TestUsageErrors, TestSettings]),
]


def build_suite(cases) -> unittest.TestSuite:
    suite = unittest.TestSuite()
    for case in cases:
        suite.addTests(unittest.defaultTestLoader.loadTestsFromTestCase(case))
    return suite


def run_all_tests() -> bool:
    """Función para ejecutar todas las pruebas."""
    suite = build_suite([case for _, cases in GROUPS for case in cases])
    result = unittest.TextTestRunner(verbosity=1).run(suite)
    return result.wasSuccessful()


def display_menu():
    """Muestra un menú interactivo para ejecutar las pruebas."""
    while True:
        print("\n--- Menú de Pruebas ---")
        for k, (title, _) in enumerate(GROUPS, start=1):
            print(f"{k}. Probar {title}")
        print(f"{len(GROUPS) + 1}. Ejecutar todas las pruebas")
        print("0. Salir")

        choice = input("Selecciona una opción: ")

        if choice == '0':
            break
        if choice == str(len(GROUPS) + 1):
            run_all_tests()
        elif choice.isdigit() and 1 <= int(choice) <= len(GROUPS):
            unittest.TextTestRunner().run(build_suite(GROUPS[int(choice) - 1][1]))
        else:
            print("Opción inválida. Intenta de nuevo.")


if __name__ == '__main__':
    if '--all' in sys.argv:
        sys.exit(0 if run_all_tests() else 1)
    display_menu()
