"""
Reporte a Sentry de verificaciones fallidas, separado de las excepciones.

Cada evento lleva event_type=verification_failure y un fingerprint por
término fallido, para que un mismo término roto agrupe en un solo issue
aunque cambien los valores medidos.
"""
import sentry_sdk


def report_verification_failure(report, level="error", **extra):
    """
    report: VerificationReport con al menos un chequeo fallido.
    extra: pares clave/valor para el contexto (comando, seed, directorio).
    """
    fallidos = report.failures()
    terminos = sorted({f"{c.check}/{c.term}" for c in fallidos})
    with sentry_sdk.push_scope() as scope:
        scope.set_tag("event_type", "verification_failure")
        scope.set_tag("failed_checks", len(fallidos))
        scope.fingerprint = ["verification-failure", *terminos]

        context = dict(extra)
        context["failures"] = [c.as_dict() for c in fallidos[:50]]
        scope.set_context("verification_failure", context)
        sentry_sdk.capture_message(f"[VERIFY] {', '.join(terminos)}", level=level)
    return terminos
