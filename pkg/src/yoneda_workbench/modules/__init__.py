# Modules package for yoneda workbench
